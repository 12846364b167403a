//! Sensitivity of the kinetic solution to the cutoff scale `α`.

use crate::error::{Error, Result};
use crate::grid::{SpectralField2D, VectorField2D};
use crate::moments::{kramer_stress, StressField};

use super::{CutoffProfile, FokkerPlanck, FpParams, KineticDensity, PotentialSpec};

/// Monomials `(a, b)` of degree ≤ 2 tracked by the comparison.
pub const LOW_MOMENTS: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

#[derive(Clone, Debug)]
pub struct CutoffRun {
    pub alpha: f64,
    pub stress: StressField,
    /// Fields in the order of [`LOW_MOMENTS`].
    pub moments: Vec<SpectralField2D>,
}

#[derive(Clone, Debug)]
pub struct CutoffComparison {
    pub runs: Vec<CutoffRun>,
    /// Relative stress difference between consecutive runs.
    pub successive_stress: Vec<f64>,
    /// Relative stress difference of every run but the last to the last one.
    pub stress_to_reference: Vec<f64>,
    /// Largest relative `L²` low-moment difference to the last run.
    pub moments_to_reference: Vec<f64>,
}

impl CutoffComparison {
    /// True when the stress differences to the reference shrink with `α`.
    pub fn monotone(&self) -> bool {
        self.stress_to_reference.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Evolves `f0` for `steps` steps of length `dt` once per `alpha` (in
/// increasing order) and compares the final stress and low moments.
pub fn apply_cutoff_comparison(
    f0: &KineticDensity,
    u: &VectorField2D,
    params: FpParams,
    pot: PotentialSpec,
    alphas: &[f64],
    dt: f64,
    steps: usize,
) -> Result<CutoffComparison> {
    let half = f0.mgrid().half_width();
    if alphas.len() < 2 {
        return Err(Error::Config("cutoff comparison needs at least two values of alpha".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("alpha values must increase".into()));
    }
    if let Some(a) = alphas.iter().find(|&&a| a > 0.5 * half) {
        return Err(Error::Config(format!("alpha = {a} exceeds half the m-box width L_m/2 = {}", 0.5 * half)));
    }
    let mut runs = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let solver = FokkerPlanck::new(params, pot, CutoffProfile::new(alpha)?, f0.mgrid().clone());
        let mut f = f0.clone();
        for _ in 0..steps {
            solver.step(&mut f, u, dt)?;
        }
        runs.push(CutoffRun {
            alpha,
            stress: kramer_stress(&f, pot.q())?,
            moments: LOW_MOMENTS.iter().map(|&(a, b)| f.moment_field(a, b)).collect(),
        });
        log::info!("cutoff run alpha={alpha} done");
    }
    let reference = runs.last().expect("at least two runs");
    let successive_stress = runs.windows(2).map(|w| w[1].stress.relative_difference(&w[0].stress)).collect();
    let stress_to_reference = runs[..runs.len() - 1]
        .iter()
        .map(|r| r.stress.relative_difference(&reference.stress))
        .collect();
    let moments_to_reference = runs[..runs.len() - 1]
        .iter()
        .map(|r| {
            r.moments
                .iter()
                .zip(&reference.moments)
                .map(|(a, b)| {
                    let d = a.sub(b).l2_norm();
                    let s = b.l2_norm();
                    if s > 0.0 {
                        d / s
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(CutoffComparison { runs, successive_stress, stress_to_reference, moments_to_reference })
}

/// Per x-point pair `(∫|m|^{2k}(1-ψ_α) f dm, α⁻¹ ∫|m|^{4q} f dm)`; the first
/// never exceeds the second when `k < 2q` and `α ≥ 1`.
pub fn tail_moment_bound(
    f: &KineticDensity,
    cutoff: &CutoffProfile,
    pot: &PotentialSpec,
    k: usize,
) -> Result<Vec<(f64, f64)>> {
    let q = pot.q();
    if (2 * k + 1) as f64 > 4.0 * q {
        return Err(Error::Domain(format!("tail bound needs 2k+1 <= 4q, got k={k}, q={q}")));
    }
    if cutoff.alpha() < 1.0 {
        return Err(Error::Domain(format!("tail bound needs alpha >= 1, got {}", cutoff.alpha())));
    }
    let mgrid = f.mgrid();
    let lhs_w = mgrid.sample(|a, b| {
        let r = a.hypot(b);
        r.powi(2 * k as i32) * (1.0 - cutoff.psi_radial(r))
    });
    let rhs_w = mgrid.sample(|a, b| a.hypot(b).powf(4.0 * q) / cutoff.alpha());
    let lhs = f.weighted_field(&lhs_w);
    let rhs = f.weighted_field(&rhs_w);
    Ok(lhs.values().iter().copied().zip(rhs.values().iter().copied()).collect())
}
