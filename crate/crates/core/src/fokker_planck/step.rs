//! Strang-split time stepping: half configuration-space substep, full
//! spatial substep, half configuration-space substep.
//!
//! Configuration substep: conservative finite volumes on the m-box. The
//! restoring drift and diffusion `ε ∇·(∇f + f ∇U_α)` share an exponentially
//! fitted (Scharfetter–Gummel) face flux, so `e^{-U_α}` is an exact discrete
//! steady state; the stretching drift `((∇u) m) ψ_α` is upwinded. Time
//! integration is SSP-RK2, subcycled to respect the positivity bound.
//!
//! Spatial substep: pseudo-spectral advection in conservative form
//! `∇·(u f)` with 2/3 dealiasing and an integrating factor for `ν₂Δ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{partial, VectorField2D};
use crate::mgrid::MGrid;

use super::{CutoffProfile, KineticDensity, PotentialSpec};

const CFL_SAFETY: f64 = 0.9;
const MAX_SUBCYCLES: usize = 512;
const SPATIAL_BLOCK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpParams {
    /// Configuration-space diffusivity `ε`.
    pub epsilon: f64,
    /// Centre-of-mass diffusivity `ν₂`.
    pub nu2: f64,
}

/// Diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Negative mass removed by clipping, relative to total mass.
    pub clipped_mass: f64,
    /// `min f / max f` before clipping.
    pub min_ratio_before_clip: f64,
    /// Largest number of SSP-RK2 subcycles used by a configuration half step.
    pub subcycles: usize,
}

/// Stable time-step estimates; `f64::INFINITY` when a mechanism is absent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtBounds {
    pub m_advection: f64,
    pub m_diffusion: f64,
    pub x_advection: f64,
    pub dt: f64,
}

fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Velocity gradient `a_ij = ∂_j u_i` at every grid point.
fn velocity_gradient(u: &VectorField2D) -> [Vec<f64>; 4] {
    [
        partial(&u.u1, 0).into_values(),
        partial(&u.u1, 1).into_values(),
        partial(&u.u2, 0).into_values(),
        partial(&u.u2, 1).into_values(),
    ]
}

/// Precomputed face data for one (potential, cutoff, m-grid) combination.
#[derive(Clone, Debug)]
pub struct FokkerPlanck {
    params: FpParams,
    pot: PotentialSpec,
    cutoff: CutoffProfile,
    mgrid: MGrid,
    // faces normal to m1: between (i1, i2) and (i1 + 1, i2), index i1 * n + i2
    // faces normal to m2: between (i1, i2) and (i1, i2 + 1), index i1 * (n - 1) + i2
    fwd: [Vec<f64>; 2],
    bwd: [Vec<f64>; 2],
    // m_k ψ_α / Δm at face centres
    face_m1: [Vec<f64>; 2],
    face_m2: [Vec<f64>; 2],
    max_face_m: [f64; 2],
    max_sg_outflow: f64,
    clip_tolerance: f64,
}

impl FokkerPlanck {
    pub fn new(params: FpParams, pot: PotentialSpec, cutoff: CutoffProfile, mgrid: MGrid) -> Self {
        let n = mgrid.n();
        let h = mgrid.spacing();
        let lm = mgrid.half_width();
        let centers = mgrid.centers().to_vec();
        let potential: Vec<f64> = mgrid
            .sample(|a, b| cutoff.effective_potential(&pot, a.hypot(b)));
        let diff = params.epsilon / (h * h);

        let mut fwd = [Vec::new(), Vec::new()];
        let mut bwd = [Vec::new(), Vec::new()];
        let mut face_m1 = [Vec::new(), Vec::new()];
        let mut face_m2 = [Vec::new(), Vec::new()];
        let mut outflow = vec![0.0; n * n];
        for dir in 0..2 {
            for i1 in 0..n {
                for i2 in 0..n {
                    let (l, r, fm1, fm2) = if dir == 0 {
                        if i1 + 1 >= n {
                            continue;
                        }
                        (i1 * n + i2, (i1 + 1) * n + i2, -lm + (i1 + 1) as f64 * h, centers[i2])
                    } else {
                        if i2 + 1 >= n {
                            continue;
                        }
                        (i1 * n + i2, i1 * n + i2 + 1, centers[i1], -lm + (i2 + 1) as f64 * h)
                    };
                    let du = potential[r] - potential[l];
                    let (cf, cb) = (diff * bernoulli(du), diff * bernoulli(-du));
                    fwd[dir].push(cf);
                    bwd[dir].push(cb);
                    outflow[l] += cf;
                    outflow[r] += cb;
                    let psi = cutoff.psi(fm1, fm2);
                    face_m1[dir].push(fm1 * psi / h);
                    face_m2[dir].push(fm2 * psi / h);
                }
            }
        }
        let max_abs = |v: &Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_face_m = [
            max_abs(&face_m1[0]).max(max_abs(&face_m1[1])),
            max_abs(&face_m2[0]).max(max_abs(&face_m2[1])),
        ];
        let max_sg_outflow = outflow.iter().copied().fold(0.0, f64::max);
        Self {
            params,
            pot,
            cutoff,
            mgrid,
            fwd,
            bwd,
            face_m1,
            face_m2,
            max_face_m,
            max_sg_outflow,
            clip_tolerance: 1e-10,
        }
    }

    pub fn params(&self) -> FpParams {
        self.params
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn mgrid(&self) -> &MGrid {
        &self.mgrid
    }

    /// Relative clipped-mass level above which a step fails.
    pub fn with_clip_tolerance(mut self, tol: f64) -> Self {
        self.clip_tolerance = tol;
        self
    }

    /// One Strang step with the velocity held at `u`.
    pub fn step(&self, f: &mut KineticDensity, u: &VectorField2D, dt: f64) -> Result<StepReport> {
        if f.mgrid() != &self.mgrid {
            return Err(Error::Config("density and solver use different m-grids".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::StepRejected(format!("time step must be positive, got {dt}")));
        }
        let grid = f.grid();
        let x_rate = u.u1.max_abs() / grid.dx1() + u.u2.max_abs() / grid.dx2();
        if dt * x_rate > 1.0 {
            return Err(Error::StepRejected(format!(
                "spatial CFL number {:.3} exceeds 1",
                dt * x_rate
            )));
        }
        let grad = velocity_gradient(u);
        let mass_before = f.mass();
        let mut report = StepReport::default();
        report.subcycles = self.configuration_substep(f, &grad, 0.5 * dt)?;
        self.spatial_substep(f, u, dt);
        self.clip(f, mass_before, &mut report)?;
        report.subcycles = report.subcycles.max(self.configuration_substep(f, &grad, 0.5 * dt)?);
        Ok(report)
    }

    /// Stretching + restoring + diffusion in m at every x-point.
    fn configuration_substep(&self, f: &mut KineticDensity, grad: &[Vec<f64>; 4], dt: f64) -> Result<usize> {
        let nc = self.mgrid.len();
        let mut k = vec![0.0; nc];
        let mut stage = vec![0.0; nc];
        let mut max_sub = 0;
        for (p, block) in f.data_mut().chunks_exact_mut(nc).enumerate() {
            let a = [grad[0][p], grad[1][p], grad[2][p], grad[3][p]];
            let flow = 2.0
                * ((a[0].abs() + a[1].abs()) * self.max_face_m[0].max(self.max_face_m[1])
                    + (a[2].abs() + a[3].abs()) * self.max_face_m[0].max(self.max_face_m[1]));
            let rate = self.max_sg_outflow + flow;
            let sub = if rate > 0.0 { (dt * rate / CFL_SAFETY).ceil() as usize } else { 1 }.max(1);
            if sub > MAX_SUBCYCLES {
                return Err(Error::StepRejected(format!(
                    "configuration substep needs {sub} subcycles (limit {MAX_SUBCYCLES})"
                )));
            }
            max_sub = max_sub.max(sub);
            let h = dt / sub as f64;
            for _ in 0..sub {
                // SSP-RK2 (Heun)
                self.rhs(&a, block, &mut k);
                for ((s, &x), &kv) in stage.iter_mut().zip(block.iter()).zip(&k) {
                    *s = x + h * kv;
                }
                self.rhs(&a, &stage, &mut k);
                for ((x, &s), &kv) in block.iter_mut().zip(&stage).zip(&k) {
                    *x = 0.5 * (*x + s + h * kv);
                }
            }
        }
        Ok(max_sub)
    }

    /// Finite-volume right side for one x-point with velocity gradient `a`.
    fn rhs(&self, a: &[f64; 4], f: &[f64], out: &mut [f64]) {
        let n = self.mgrid.n();
        out.iter_mut().for_each(|v| *v = 0.0);
        // faces normal to m1
        let (fw, bw, fm1, fm2) = (&self.fwd[0], &self.bwd[0], &self.face_m1[0], &self.face_m2[0]);
        for i1 in 0..n - 1 {
            let base = i1 * n;
            for i2 in 0..n {
                let face = base + i2;
                let (l, r) = (face, face + n);
                let v = a[0] * fm1[face] + a[1] * fm2[face];
                let g = (fw[face] + v.max(0.0)) * f[l] - (bw[face] - v.min(0.0)) * f[r];
                out[l] -= g;
                out[r] += g;
            }
        }
        // faces normal to m2
        let (fw, bw, fm1, fm2) = (&self.fwd[1], &self.bwd[1], &self.face_m1[1], &self.face_m2[1]);
        for i1 in 0..n {
            for i2 in 0..n - 1 {
                let face = i1 * (n - 1) + i2;
                let l = i1 * n + i2;
                let v = a[2] * fm1[face] + a[3] * fm2[face];
                let g = (fw[face] + v.max(0.0)) * f[l] - (bw[face] - v.min(0.0)) * f[l + 1];
                out[l] -= g;
                out[l + 1] += g;
            }
        }
    }

    /// Advection by `u` and centre-of-mass diffusion for every m-cell.
    fn spatial_substep(&self, f: &mut KineticDensity, u: &VectorField2D, dt: f64) {
        let grid = std::sync::Arc::clone(f.grid());
        let np = grid.len();
        let nc = self.mgrid.len();
        let (nx, ny) = (grid.nx(), grid.ny());
        let decay: Vec<f64> = (0..np).map(|p| (-self.params.nu2 * grid.k_squared(p) * dt).exp()).collect();
        let wave: Vec<(f64, f64, bool)> = (0..np)
            .map(|p| {
                let (k1, k2) = grid.derivative_wavenumber(p);
                (k1, k2, grid.in_band(p))
            })
            .collect();
        let mirror: Vec<usize> = (0..np)
            .map(|p| {
                let (i, j) = (p / ny, p % ny);
                ((nx - i) % nx) * ny + (ny - j) % ny
            })
            .collect();
        let velocity: Vec<Complex64> = u
            .u1
            .values()
            .iter()
            .zip(u.u2.values())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();

        let mut buf = vec![Complex64::default(); np];
        let mut fhat = vec![Complex64::default(); np];
        let mut n0 = vec![Complex64::default(); np];
        let mut n1 = vec![Complex64::default(); np];
        let tendency = |vals: &[f64], buf: &mut Vec<Complex64>, out: &mut Vec<Complex64>| {
            for ((b, &v), &c) in buf.iter_mut().zip(vals).zip(&velocity) {
                *b = c * v;
            }
            grid.forward_in_place(buf);
            for p in 0..np {
                let (k1, k2, keep) = wave[p];
                if !keep {
                    out[p] = Complex64::default();
                    continue;
                }
                let z = buf[p];
                let zc = buf[mirror[p]].conj();
                let a = 0.5 * (z + zc);
                let b = Complex64::new(0.0, -0.5) * (z - zc);
                // -(i k1 A + i k2 B)
                out[p] = Complex64::new(0.0, -1.0) * (a * k1 + b * k2);
            }
        };

        let data = f.data_mut();
        let mut block = vec![0.0; SPATIAL_BLOCK * np];
        let mut scratch = vec![0.0; np];
        for c0 in (0..nc).step_by(SPATIAL_BLOCK) {
            let bw = SPATIAL_BLOCK.min(nc - c0);
            for p in 0..np {
                let src = &data[p * nc + c0..p * nc + c0 + bw];
                for (b, &v) in src.iter().enumerate() {
                    block[b * np + p] = v;
                }
            }
            for b in 0..bw {
                let vals = &mut block[b * np..(b + 1) * np];
                for (h, &v) in fhat.iter_mut().zip(vals.iter()) {
                    *h = Complex64::new(v, 0.0);
                }
                grid.forward_in_place(&mut fhat);
                tendency(vals, &mut buf, &mut n0);
                for p in 0..np {
                    buf[p] = decay[p] * (fhat[p] + dt * n0[p]);
                }
                grid.inverse_in_place(&mut buf);
                for (s, c) in scratch.iter_mut().zip(&buf) {
                    *s = c.re;
                }
                tendency(&scratch, &mut buf, &mut n1);
                for p in 0..np {
                    buf[p] = decay[p] * fhat[p] + 0.5 * dt * (decay[p] * n0[p] + n1[p]);
                }
                grid.inverse_in_place(&mut buf);
                for (v, c) in vals.iter_mut().zip(&buf) {
                    *v = c.re;
                }
            }
            for p in 0..np {
                let dst = &mut data[p * nc + c0..p * nc + c0 + bw];
                for (b, v) in dst.iter_mut().enumerate() {
                    *v = block[b * np + p];
                }
            }
        }
    }

    fn clip(&self, f: &mut KineticDensity, mass_before: f64, report: &mut StepReport) -> Result<()> {
        let max = f.max();
        let min = f.min();
        report.min_ratio_before_clip = if max > 0.0 { min / max } else { 0.0 };
        if min >= 0.0 {
            return Ok(());
        }
        let w = f.mgrid().cell_area() * f.grid().cell_area();
        let mut negative = 0.0;
        for v in f.data_mut().iter_mut() {
            if *v < 0.0 {
                negative -= *v;
                *v = 0.0;
            }
        }
        let clipped = negative * w / mass_before.max(f64::MIN_POSITIVE);
        report.clipped_mass = clipped;
        if clipped > self.clip_tolerance {
            return Err(Error::Stability(format!(
                "clipping removed {clipped:.3e} of the mass (tolerance {:.1e})",
                self.clip_tolerance
            )));
        }
        let scale = mass_before / f.mass();
        f.data_mut().iter_mut().for_each(|v| *v *= scale);
        log::debug!("clipped {clipped:.3e} relative mass, rescaled by {scale}");
        Ok(())
    }

    /// Stable step estimates for the current state.
    pub fn suggest_dt(&self, f: &KineticDensity, u: &VectorField2D) -> DtBounds {
        let h = self.mgrid.spacing();
        let grad = velocity_gradient(u);
        let grad_max = (0..f.grid().len())
            .map(|p| {
                (grad[0][p].abs() + grad[1][p].abs()).max(grad[2][p].abs() + grad[3][p].abs())
            })
            .fold(0.0, f64::max);
        // drifts only act on the cutoff support
        let r_sup = (2.0 * self.cutoff.alpha()).min(std::f64::consts::SQRT_2 * self.mgrid.half_width());
        let drift = grad_max * r_sup + self.params.epsilon * self.pot.gradient_radial(r_sup);
        let m_advection = if drift > 0.0 { h / drift } else { f64::INFINITY };
        let m_diffusion = if self.params.epsilon > 0.0 {
            h * h / (4.0 * self.params.epsilon)
        } else {
            f64::INFINITY
        };
        let grid = f.grid();
        let x_rate = u.u1.max_abs() / grid.dx1() + u.u2.max_abs() / grid.dx2();
        let x_advection = if x_rate > 0.0 { 1.0 / x_rate } else { f64::INFINITY };
        let m_combined = 1.0 / (1.0 / m_advection + 1.0 / m_diffusion);
        DtBounds { m_advection, m_diffusion, x_advection, dt: CFL_SAFETY * m_combined.min(x_advection) }
    }
}

/// Functional form of [`FokkerPlanck::step`].
pub fn fp_step(
    f: &KineticDensity,
    u: &VectorField2D,
    params: FpParams,
    pot: PotentialSpec,
    cutoff: CutoffProfile,
    dt: f64,
) -> Result<(KineticDensity, StepReport)> {
    let solver = FokkerPlanck::new(params, pot, cutoff, f.mgrid().clone());
    let mut out = f.clone();
    let report = solver.step(&mut out, u, dt)?;
    Ok((out, report))
}

/// Functional form of [`FokkerPlanck::suggest_dt`].
pub fn suggest_dt(
    f: &KineticDensity,
    u: &VectorField2D,
    params: FpParams,
    pot: PotentialSpec,
    cutoff: CutoffProfile,
) -> DtBounds {
    FokkerPlanck::new(params, pot, cutoff, f.mgrid().clone()).suggest_dt(f, u)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::grid::{Grid, SpectralField2D};
    use crate::fokker_planck::truncated_equilibrium;

    fn shear_flow(grid: &Arc<Grid>, amp: f64) -> VectorField2D {
        VectorField2D::new(
            SpectralField2D::from_fn(grid, |_, x2| amp * x2.sin()),
            SpectralField2D::from_fn(grid, |x1, _| amp * x1.sin()),
        )
    }

    fn setup(n_m: usize, half: f64) -> (Arc<Grid>, MGrid, PotentialSpec, CutoffProfile) {
        let grid = Grid::square(16).unwrap();
        let mgrid = MGrid::new(n_m, half).unwrap();
        (grid, mgrid, PotentialSpec::hookean(), CutoffProfile::new(0.5 * half).unwrap())
    }

    fn bump(grid: &Arc<Grid>, mgrid: &MGrid, centre: (f64, f64), width: f64) -> KineticDensity {
        let raw = mgrid.sample(|a, b| (-((a - centre.0).powi(2) + (b - centre.1).powi(2)) / width).exp());
        let z = mgrid.integrate(&raw);
        let rho = SpectralField2D::from_fn(grid, |x1, x2| 1.0 + 0.3 * x1.cos() * x2.sin());
        let slice: Vec<f64> = raw.iter().map(|v| v / z).collect();
        KineticDensity::separable(grid, mgrid.clone(), &rho, &slice).unwrap()
    }

    fn relative_entropy(f: &KineticDensity, eq: &[f64]) -> f64 {
        let w = f.mgrid().cell_area() * f.grid().cell_area();
        f.slices()
            .map(|s| {
                s.iter()
                    .zip(eq)
                    .filter(|(v, _)| **v > 0.0)
                    .map(|(v, e)| v * (v / e).ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
            * w
    }

    #[test]
    fn equilibrium_is_stationary() {
        let (grid, mgrid, pot, cutoff) = setup(32, 8.0);
        let eq = truncated_equilibrium(&pot, &cutoff, &mgrid);
        let mut f =
            KineticDensity::separable(&grid, mgrid.clone(), &SpectralField2D::constant(&grid, 1.0), &eq).unwrap();
        let f0 = f.clone();
        let solver = FokkerPlanck::new(FpParams { epsilon: 1.0, nu2: 0.1 }, pot, cutoff, mgrid);
        let u = VectorField2D::zeros(&grid);
        for _ in 0..3 {
            solver.step(&mut f, &u, 0.05).unwrap();
            let dev = f.data().iter().zip(f0.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-10 * f0.max(), "{dev}");
        }
    }

    #[test]
    fn mass_is_conserved_under_flow() {
        let (grid, mgrid, pot, cutoff) = setup(24, 6.0);
        let mut f = bump(&grid, &mgrid, (0.7, -0.4), 0.8);
        let solver = FokkerPlanck::new(FpParams { epsilon: 0.5, nu2: 0.2 }, pot, cutoff, mgrid);
        let u = shear_flow(&grid, 0.5);
        for _ in 0..10 {
            let m0 = f.mass();
            let r = solver.step(&mut f, &u, 0.05).unwrap();
            assert!(((f.mass() - m0) / m0).abs() < 1e-10);
            assert!(r.clipped_mass <= 1e-10);
        }
    }

    #[test]
    fn free_energy_decreases_without_flow() {
        let (grid, mgrid, pot, cutoff) = setup(32, 8.0);
        let eq = truncated_equilibrium(&pot, &cutoff, &mgrid);
        let mut f = bump(&grid, &mgrid, (1.5, 0.5), 0.5);
        let solver = FokkerPlanck::new(FpParams { epsilon: 1.0, nu2: 0.1 }, pot, cutoff, mgrid);
        let u = VectorField2D::zeros(&grid);
        let mut prev = relative_entropy(&f, &eq);
        for _ in 0..100 {
            solver.step(&mut f, &u, 0.01).unwrap();
            let e = relative_entropy(&f, &eq);
            assert!(e <= prev + 1e-8, "{e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn relaxes_to_equilibrium() {
        let (grid, mgrid, pot, cutoff) = setup(32, 8.0);
        let eq = truncated_equilibrium(&pot, &cutoff, &mgrid);
        let target =
            KineticDensity::separable(&grid, mgrid.clone(), &SpectralField2D::constant(&grid, 1.0), &eq).unwrap();
        let mut f = bump(&grid, &mgrid, (2.0, -1.0), 0.3);
        // unit density at every x so the target has equal mass
        let rho = f.density_field();
        let data: Vec<f64> = f
            .slices()
            .zip(rho.values())
            .flat_map(|(s, r)| s.iter().map(move |v| v / r).collect::<Vec<_>>())
            .collect();
        f = KineticDensity::new(&grid, mgrid.clone(), data).unwrap();
        let eps = 2.0;
        let solver = FokkerPlanck::new(FpParams { epsilon: eps, nu2: 0.0 }, pot, cutoff, mgrid);
        let u = VectorField2D::zeros(&grid);
        let d0 = f.l1_distance(&target);
        let mut prev = d0;
        let dt = 0.01;
        for _ in 0..((5.0 / eps) / dt).round() as usize {
            solver.step(&mut f, &u, dt).unwrap();
            let d = f.l1_distance(&target);
            assert!(d <= prev + 1e-12);
            prev = d;
        }
        assert!(prev < 0.1 * d0, "{prev} vs {d0}");
    }

    #[test]
    fn density_follows_scalar_transport() {
        let (grid, mgrid, pot, cutoff) = setup(16, 6.0);
        let mut f = bump(&grid, &mgrid, (0.5, 0.5), 1.0);
        let params = FpParams { epsilon: 1.0, nu2: 0.07 };
        let solver = FokkerPlanck::new(params, pot, cutoff, mgrid);
        let u = shear_flow(&grid, 0.6);
        let dt = 0.05;
        let mut rho = f.density_field();
        for _ in 0..5 {
            solver.step(&mut f, &u, dt).unwrap();
            rho = scalar_step(&rho, &u, params.nu2, dt);
        }
        let err = f.density_field().sub(&rho).max_abs();
        assert!(err < 1e-8, "{err}");
    }

    /// Independent integrating-factor RK2 for `ρ_t + ∇·(uρ) = ν Δρ`.
    fn scalar_step(rho: &SpectralField2D, u: &VectorField2D, nu: f64, dt: f64) -> SpectralField2D {
        let grid = rho.grid().clone();
        let tendency = |r: &SpectralField2D| {
            let flux = VectorField2D::new(u.u1.product(r), u.u2.product(r));
            crate::grid::divergence(&flux).scale(-1.0)
        };
        let decay = |f: &SpectralField2D| f.map_coeffs(|p, c| c * (-nu * grid.k_squared(p) * dt).exp());
        let n0 = tendency(rho);
        let g = decay(&rho.add(&n0.scale(dt)));
        let n1 = tendency(&g);
        decay(rho).add(&decay(&n0).add(&n1).scale(0.5 * dt))
    }

    #[test]
    fn dt_bounds() {
        let (grid, mgrid, pot, _) = setup(8, 2.0);
        let f = bump(&grid, &mgrid, (0.0, 0.0), 1.0);
        let u = VectorField2D::zeros(&grid);
        let none = FokkerPlanck::new(FpParams { epsilon: 0.0, nu2: 0.0 }, pot, CutoffProfile::new(1.0).unwrap(), mgrid);
        assert_eq!(none.suggest_dt(&f, &u).dt, f64::INFINITY);

        let u1 = shear_flow(&grid, 1.0);
        let u2 = shear_flow(&grid, 2.0);
        let a = none.suggest_dt(&f, &u1).m_advection;
        let b = none.suggest_dt(&f, &u2).m_advection;
        assert!((a / b - 2.0).abs() < 1e-12);

        // Δm = 0.2, α = 4: restoring drift bounded by 2·(2α) = 16
        let mg = MGrid::new(80, 8.0).unwrap();
        let g = bump(&grid, &mg, (0.0, 0.0), 1.0);
        let s = FokkerPlanck::new(FpParams { epsilon: 1.0, nu2: 0.0 }, pot, CutoffProfile::new(4.0).unwrap(), mg);
        let d = s.suggest_dt(&g, &u);
        assert!((d.m_advection - 0.2 / 16.0).abs() < 1e-14);
        assert!((d.m_diffusion - 0.01).abs() < 1e-14);
    }

    #[test]
    fn spatial_cfl_violation_is_rejected() {
        let (grid, mgrid, pot, cutoff) = setup(8, 2.0);
        let mut f = bump(&grid, &mgrid, (0.0, 0.0), 1.0);
        let solver = FokkerPlanck::new(FpParams { epsilon: 1.0, nu2: 0.0 }, pot, cutoff, mgrid);
        let u = shear_flow(&grid, 1.0);
        let dx = 2.0 * PI / 16.0;
        assert!(matches!(solver.step(&mut f, &u, 2.0 * dx), Err(Error::StepRejected(_))));
    }
}
