//! Incompressible 2D Navier–Stokes in vorticity form with polymer forcing
//! `K ∇^⊥·(∇·σ)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{partial, Grid, SpectralField2D, VectorField2D};
use crate::integrate::{check_cfl, if_rk2, transport};
use crate::moments::StressField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsParams {
    /// Kinematic viscosity `ν₁`.
    pub nu1: f64,
    /// Polymer coupling constant `K`.
    pub k: f64,
}

/// Vorticity with its zero-mean velocity and the current time.
#[derive(Clone, Debug)]
pub struct FlowState {
    omega: SpectralField2D,
    u: VectorField2D,
    pub t: f64,
}

impl FlowState {
    pub fn new(omega: SpectralField2D, t: f64) -> Self {
        let u = velocity_from_vorticity(&omega);
        Self { omega, u, t }
    }

    /// Vorticity `ω = ∂1u2 − ∂2u1` of a velocity field; any gradient part of
    /// `u` is lost.
    pub fn from_velocity(u: &VectorField2D, t: f64) -> Self {
        Self::new(crate::grid::curl(u), t)
    }

    /// `u = amp · (−cos x1 sin x2, sin x1 cos x2)`, `ω = 2 amp cos x1 cos x2`.
    pub fn taylor_green(grid: &Arc<Grid>, amp: f64) -> Self {
        Self::new(SpectralField2D::from_fn(grid, |x1, x2| 2.0 * amp * x1.cos() * x2.cos()), 0.0)
    }

    pub fn omega(&self) -> &SpectralField2D {
        &self.omega
    }

    pub fn velocity(&self) -> &VectorField2D {
        &self.u
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.omega.grid()
    }
}

/// `u = ∇^⊥ψ = (−∂2ψ, ∂1ψ)` with `Δψ = ω`. A nonzero mean of `ω` cannot be
/// inverted on the torus; it is dropped with a warning.
pub fn velocity_from_vorticity(omega: &SpectralField2D) -> VectorField2D {
    let grid = Arc::clone(omega.grid());
    let mean = omega.coeffs()[0];
    if mean.norm() > 1e-12 * omega.max_abs().max(1.0) {
        log::warn!("vorticity has nonzero mean {:.3e}; removed", mean.re);
    }
    let psi = omega.map_coeffs(|p, c| {
        let kk = grid.k_squared(p);
        if kk == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -c / kk
        }
    });
    VectorField2D::new(partial(&psi, 1).scale(-1.0), partial(&psi, 0))
}

/// `∇^⊥·(∇·σ) = (∂1² − ∂2²)σ12 + ∂1∂2(σ22 − σ11)`.
pub fn polymer_forcing(sigma: &StressField) -> SpectralField2D {
    let grid = Arc::clone(sigma.grid());
    let (s11, s12, s22) = (sigma.s11.coeffs(), sigma.s12.coeffs(), sigma.s22.coeffs());
    let coeffs = (0..grid.len())
        .map(|p| {
            let (k1, k2) = grid.derivative_wavenumber(p);
            -(k1 * k1 - k2 * k2) * s12[p] - k1 * k2 * (s22[p] - s11[p])
        })
        .collect();
    SpectralField2D::from_coeffs(&grid, coeffs)
}

/// One integrating-factor RK2 step, with `σ` frozen over the step.
pub fn ns_step(state: &FlowState, sigma: &StressField, params: NsParams, dt: f64) -> Result<FlowState> {
    check_cfl(state.grid(), &state.u, dt)?;
    let forcing = polymer_forcing(sigma).scale(params.k);
    let next = if_rk2(std::slice::from_ref(&state.omega), params.nu1, dt, |y| {
        let u = velocity_from_vorticity(&y[0]);
        Ok(vec![transport(&y[0], &u).add(&forcing)])
    })?;
    let omega = next.into_iter().next().expect("one field");
    Ok(FlowState::new(omega, state.t + dt))
}

/// `½ ∫ |u|² dx`.
pub fn kinetic_energy(state: &FlowState) -> f64 {
    0.5 * (state.u.u1.l2_norm_sq() + state.u.u2.l2_norm_sq())
}

/// `∫ ω² dx = ‖∇u‖²_{L²}` for divergence-free `u`.
pub fn enstrophy(state: &FlowState) -> f64 {
    state.omega.l2_norm_sq()
}
