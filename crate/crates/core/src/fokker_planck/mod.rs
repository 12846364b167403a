//! Kinetic solver for the polymer configuration density `f(x, m, t)`.
//!
//! The configuration variable lives on a bounded box `[-L_m, L_m]²` with
//! zero-flux walls. Spring and stretching drifts are multiplied by the
//! radial cutoff `ψ_α(m) = Ψ(|m|/α)`, which vanishes for `|m| ≥ 2α`.

mod cutoff_study;
mod step;

use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField2D};
use crate::mgrid::MGrid;

pub use cutoff_study::{apply_cutoff_comparison, tail_moment_bound, CutoffComparison, CutoffRun};
pub use step::{fp_step, suggest_dt, DtBounds, FokkerPlanck, FpParams, StepReport};

/// Spring potential `U(m) = |m|^{2q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec {
    q: f64,
}

impl PotentialSpec {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Config(format!("potential exponent q must be >= 1, got {q}")));
        }
        Ok(Self { q })
    }

    pub fn hookean() -> Self {
        Self { q: 1.0 }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Integer exponent, when `q` is one.
    pub fn integer_q(&self) -> Option<usize> {
        (self.q.fract() == 0.0).then_some(self.q as usize)
    }

    pub fn value(&self, m1: f64, m2: f64) -> f64 {
        (m1 * m1 + m2 * m2).powf(self.q)
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        r.powf(2.0 * self.q)
    }

    /// `∇U = 2q |m|^{2(q-1)} m`.
    pub fn gradient(&self, m1: f64, m2: f64) -> (f64, f64) {
        let s = 2.0 * self.q * (m1 * m1 + m2 * m2).powf(self.q - 1.0);
        (s * m1, s * m2)
    }

    /// `|∇U|` at radius `r`.
    pub fn gradient_radial(&self, r: f64) -> f64 {
        2.0 * self.q * r.powf(2.0 * self.q - 1.0)
    }

    /// Continuum partition function `∫ e^{-U} dm = π Γ(1/q) / q`.
    pub fn partition_function(&self) -> f64 {
        std::f64::consts::PI * gamma(1.0 / self.q) / self.q
    }
}

/// Smooth radial cutoff `ψ_α(m) = Ψ(|m|/α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    alpha: f64,
}

fn smooth_step_kernel(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl CutoffProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Config(format!("cutoff scale alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Cutoff that never bites on a box of half-width `half_width`.
    pub fn inactive(half_width: f64) -> Self {
        Self { alpha: half_width * std::f64::consts::SQRT_2 * 1.000_001 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Ψ(s)`: 1 on `[0, 1]`, 0 on `[2, ∞)`, smooth and decreasing between.
    pub fn profile(s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let a = smooth_step_kernel(2.0 - s);
            let b = smooth_step_kernel(s - 1.0);
            a / (a + b)
        }
    }

    pub fn psi_radial(&self, r: f64) -> f64 {
        Self::profile(r / self.alpha)
    }

    pub fn psi(&self, m1: f64, m2: f64) -> f64 {
        self.psi_radial(m1.hypot(m2))
    }

    /// Radial potential whose gradient is the truncated spring force,
    /// `U_α(r) = ∫_0^r ψ_α(s) U'(s) ds`. Equal to `U` for `r ≤ α`.
    pub fn effective_potential(&self, pot: &PotentialSpec, r: f64) -> f64 {
        let a = self.alpha;
        if r <= a {
            return pot.value_radial(r);
        }
        let upper = r.min(2.0 * a);
        // composite Simpson on [α, upper]
        let n = 256;
        let h = (upper - a) / n as f64;
        let g = |s: f64| self.psi_radial(s) * pot.gradient_radial(s);
        let mut sum = g(a) + g(upper);
        for i in 1..n {
            let s = a + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 * g(s) } else { 2.0 * g(s) };
        }
        pot.value_radial(a) + sum * h / 3.0
    }
}

/// Nonnegative density on the x-grid × m-grid, stored with the m-cells of
/// one x-point contiguous: `data[p * nm² + c]`.
#[derive(Clone, Debug)]
pub struct KineticDensity {
    grid: Arc<Grid>,
    mgrid: MGrid,
    data: Vec<f64>,
}

impl KineticDensity {
    pub fn new(grid: &Arc<Grid>, mgrid: MGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * mgrid.len() {
            return Err(Error::Config(format!(
                "density has {} values, grids need {}",
                data.len(),
                grid.len() * mgrid.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kinetic density"));
        }
        if data.iter().any(|v| *v < 0.0) {
            return Err(Error::Domain("kinetic density must be nonnegative".into()));
        }
        Ok(Self { grid: Arc::clone(grid), mgrid, data })
    }

    /// `f(x, m) = rho(x) · slice(m)`.
    pub fn separable(grid: &Arc<Grid>, mgrid: MGrid, rho: &SpectralField2D, slice: &[f64]) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.len() * mgrid.len());
        for &r in rho.values() {
            data.extend(slice.iter().map(|s| r * s));
        }
        Self::new(grid, mgrid, data)
    }

    /// Builds each x-point's slice from its coordinates.
    pub fn from_slices(
        grid: &Arc<Grid>,
        mgrid: MGrid,
        slice_at: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.len() * mgrid.len());
        for p in 0..grid.len() {
            let (x1, x2) = grid.coords(p);
            let s = slice_at(x1, x2);
            if s.len() != mgrid.len() {
                return Err(Error::Config("slice length does not match m-grid".into()));
            }
            data.extend(s);
        }
        Self::new(grid, mgrid, data)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mgrid(&self) -> &MGrid {
        &self.mgrid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn slice(&self, p: usize) -> &[f64] {
        let nc = self.mgrid.len();
        &self.data[p * nc..(p + 1) * nc]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.mgrid.len())
    }

    /// `∫∫ f dm dx`.
    pub fn mass(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.mgrid.cell_area() * self.grid.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `M_{a,b}[f](x)` as a spatial field.
    pub fn moment_field(&self, a: usize, b: usize) -> SpectralField2D {
        let weights = self.mgrid.sample(|m1, m2| m1.powi(a as i32) * m2.powi(b as i32));
        self.weighted_field(&weights)
    }

    /// `x ↦ ∫ w(m) f(x, m) dm` for cell weights `w`.
    pub fn weighted_field(&self, weights: &[f64]) -> SpectralField2D {
        let area = self.mgrid.cell_area();
        let values = self
            .slices()
            .map(|s| s.iter().zip(weights).map(|(f, w)| f * w).sum::<f64>() * area)
            .collect();
        SpectralField2D::from_values(&self.grid, values)
    }

    pub fn density_field(&self) -> SpectralField2D {
        let area = self.mgrid.cell_area();
        let values = self.slices().map(|s| s.iter().sum::<f64>() * area).collect();
        SpectralField2D::from_values(&self.grid, values)
    }

    /// `∫∫ |f - g| dm dx`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum::<f64>()
            * self.mgrid.cell_area()
            * self.grid.cell_area()
    }
}

const BOX_LOSS_TOLERANCE: f64 = 1e-10;

/// Discrete `Σ e^{-U} Δm²` over the box.
pub fn discrete_partition_function(pot: &PotentialSpec, mgrid: &MGrid) -> f64 {
    mgrid.integrate(&mgrid.sample(|a, b| (-pot.value(a, b)).exp()))
}

/// `e^{-U}/Z` sampled on the m-grid and normalized to unit discrete mass.
pub fn equilibrium_density(pot: &PotentialSpec, mgrid: &MGrid) -> Result<Vec<f64>> {
    let z = discrete_partition_function(pot, mgrid);
    let lost = 1.0 - z / pot.partition_function();
    if lost > BOX_LOSS_TOLERANCE {
        return Err(Error::NormalizationLoss { lost });
    }
    Ok(mgrid.sample(|a, b| (-pot.value(a, b)).exp() / z))
}

/// Stationary state of the truncated operator: `e^{-U_α}` normalized.
pub fn truncated_equilibrium(pot: &PotentialSpec, cutoff: &CutoffProfile, mgrid: &MGrid) -> Vec<f64> {
    let raw = mgrid.sample(|a, b| (-cutoff.effective_potential(pot, a.hypot(b))).exp());
    let z = mgrid.integrate(&raw);
    raw.into_iter().map(|v| v / z).collect()
}

/// Normalized `exp(-(|m|²/c)^q)`, the stretched-polymer family.
pub fn stretched_gaussian(pot: &PotentialSpec, c: f64, mgrid: &MGrid) -> Vec<f64> {
    let raw = mgrid.sample(|a, b| (-((a * a + b * b) / c).powf(pot.q())).exp());
    let z = mgrid.integrate(&raw);
    raw.into_iter().map(|v| v / z).collect()
}

/// Normalized `e^{-|m|}` on the grid.
pub fn exponential_tail(mgrid: &MGrid) -> Vec<f64> {
    let raw = mgrid.sample(|a, b| (-a.hypot(b)).exp());
    let z = mgrid.integrate(&raw);
    raw.into_iter().map(|v| v / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hookean_partition_function() {
        let pot = PotentialSpec::hookean();
        assert!((pot.partition_function() - PI).abs() < 1e-14);
        let mg = MGrid::new(64, 5.0).unwrap();
        let z = discrete_partition_function(&pot, &mg);
        assert!((z - PI).abs() < 1e-8, "{z}");
        let eq = equilibrium_density(&pot, &mg).unwrap();
        assert!((mg.integrate(&eq) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_box_loses_mass() {
        let mg = MGrid::new(64, 3.0).unwrap();
        assert!(matches!(
            equilibrium_density(&PotentialSpec::hookean(), &mg),
            Err(Error::NormalizationLoss { .. })
        ));
    }

    #[test]
    fn cutoff_profile_shape() {
        let c = CutoffProfile::new(2.0).unwrap();
        assert_eq!(c.psi(1.0, 1.0), 1.0);
        assert_eq!(c.psi(4.0, 0.1), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = c.psi_radial(2.0 + 2.0 * i as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn effective_potential_matches_inside_and_flattens_outside() {
        let pot = PotentialSpec::hookean();
        let c = CutoffProfile::new(2.0).unwrap();
        assert_eq!(c.effective_potential(&pot, 1.5), 2.25);
        let u4 = c.effective_potential(&pot, 4.0);
        assert!(u4 > 4.0 && u4 < 16.0);
        assert!((c.effective_potential(&pot, 5.0) - u4).abs() < 1e-12);
    }

    #[test]
    fn potential_rejects_small_q() {
        assert!(PotentialSpec::new(0.5).is_err());
        assert_eq!(PotentialSpec::new(2.0).unwrap().integer_q(), Some(2));
        assert_eq!(PotentialSpec::new(1.5).unwrap().integer_q(), None);
    }

    #[test]
    fn stretched_family_second_moment() {
        // exp(-|m|²/c)/(πc) has M_{2,0} = c/2
        let mg = MGrid::new(96, 9.0).unwrap();
        let f = stretched_gaussian(&PotentialSpec::hookean(), 2.0, &mg);
        let m20 = crate::moments::density_moment(&f, &mg, 2, 0);
        assert!((m20 - 1.0).abs() < 1e-10);
    }
}
