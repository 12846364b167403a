//! Shared explicit integrator for spectral fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{divergence, Grid, SpectralField2D, VectorField2D};

/// `-∇·(u f)`, dealiased.
pub(crate) fn transport(f: &SpectralField2D, u: &VectorField2D) -> SpectralField2D {
    divergence(&VectorField2D::new(u.u1.product(f), u.u2.product(f))).scale(-1.0)
}

/// Rejects steps whose advective CFL number exceeds one.
pub(crate) fn check_cfl(grid: &Arc<Grid>, u: &VectorField2D, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::StepRejected(format!("time step must be positive, got {dt}")));
    }
    let c = dt * (u.u1.max_abs() / grid.dx1() + u.u2.max_abs() / grid.dx2());
    if c > 1.0 {
        return Err(Error::StepRejected(format!("CFL number {c:.3} exceeds 1")));
    }
    Ok(())
}

fn decay(f: &SpectralField2D, nu: f64, dt: f64) -> SpectralField2D {
    if nu == 0.0 {
        return f.clone();
    }
    let grid = Arc::clone(f.grid());
    f.map_coeffs(|p, c| c * (-nu * grid.k_squared(p) * dt).exp())
}

/// Integrating-factor Heun step for `∂_t y = ν Δy + N(y)` on every field.
pub(crate) fn if_rk2<F>(state: &[SpectralField2D], nu: f64, dt: f64, rhs: F) -> Result<Vec<SpectralField2D>>
where
    F: Fn(&[SpectralField2D]) -> Result<Vec<SpectralField2D>>,
{
    let n0 = rhs(state)?;
    let predictor: Vec<_> =
        state.iter().zip(&n0).map(|(y, n)| decay(&y.add(&n.scale(dt)), nu, dt)).collect();
    let n1 = rhs(&predictor)?;
    let out: Vec<_> = state
        .iter()
        .zip(n0.iter().zip(&n1))
        .map(|(y, (a, b))| decay(y, nu, dt).add(&decay(a, nu, dt).add(b).scale(0.5 * dt)))
        .collect();
    if out.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("time step result"));
    }
    Ok(out)
}
