//! Energy, entropy and inequality diagnostics.

use std::io::Write;

use serde::Serialize;
use statrs::function::erf::erf;

use crate::error::Result;
use crate::fokker_planck::{CutoffProfile, KineticDensity, PotentialSpec};
use crate::grid::partial;
use crate::mgrid::MGrid;
use crate::moments::StressField;

fn phi(s: f64) -> f64 {
    if s > 0.0 {
        s * s.ln()
    } else {
        0.0
    }
}

/// Potential sampled on the m-grid with its discrete partition function.
/// The relative entropies use `e^{-V} / Z` as reference, normalized on the
/// grid so that it integrates to one exactly.
#[derive(Clone, Debug)]
pub struct Gibbs {
    potential: Vec<f64>,
    log_z: f64,
}

impl Gibbs {
    fn from_values(potential: Vec<f64>, mgrid: &MGrid) -> Self {
        let z = mgrid.integrate(&potential.iter().map(|v| (-v).exp()).collect::<Vec<_>>());
        Self { potential, log_z: z.ln() }
    }

    /// `V = U`.
    pub fn new(pot: &PotentialSpec, mgrid: &MGrid) -> Self {
        Self::from_values(mgrid.sample(|a, b| pot.value(a, b)), mgrid)
    }

    /// `V = U_α`, the potential whose Gibbs state is stationary for the
    /// truncated kinetic equation.
    pub fn truncated(pot: &PotentialSpec, cutoff: &CutoffProfile, mgrid: &MGrid) -> Self {
        Self::from_values(mgrid.sample(|a, b| cutoff.effective_potential(pot, a.hypot(b))), mgrid)
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// `e^{-V}/Z` on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.potential.iter().map(|v| (-v - self.log_z).exp()).collect()
    }
}

/// `∫∫ f log f + V f dm dx` with `0 log 0 = 0`.
pub fn free_energy_in(f: &KineticDensity, gibbs: &Gibbs) -> f64 {
    let w = f.mgrid().cell_area() * f.grid().cell_area();
    f.slices()
        .map(|s| s.iter().zip(&gibbs.potential).map(|(&v, &u)| phi(v) + u * v).sum::<f64>())
        .sum::<f64>()
        * w
}

/// `𝓔[f] = ∫∫ f log f + U f dm dx`.
pub fn free_energy(f: &KineticDensity, pot: &PotentialSpec) -> f64 {
    free_energy_in(f, &Gibbs::new(pot, f.mgrid()))
}

/// `(global, local)` relative entropies:
/// global `∫∫ f log(f / (ρ̄ e^{-V}/Z))` with `ρ̄` the mean density, local
/// `∫∫ f log(f / (M_{0,0}(x) e^{-V}/Z))`. They satisfy the chain rule
/// `global = local + ∫ M_{0,0} log(M_{0,0}/ρ̄) dx`.
pub fn relative_entropies(f: &KineticDensity, gibbs: &Gibbs) -> (f64, f64) {
    relative_entropies_from(f, gibbs, free_energy_in(f, gibbs))
}

fn relative_entropies_from(f: &KineticDensity, gibbs: &Gibbs, energy: f64) -> (f64, f64) {
    let dx = f.grid().cell_area();
    let mass = f.mass();
    let rho_bar = mass / (dx * f.grid().len() as f64);
    let rho = f.density_field();
    let spatial: f64 = rho.values().iter().map(|&r| phi(r)).sum::<f64>() * dx;
    // ∫∫ f log f + V f + log Z · mass
    let base = energy + gibbs.log_z * mass;
    let global = base - mass * rho_bar.ln();
    let local = base - spatial;
    (global, local)
}

/// Logarithmic mean `(b − a)/(log b − log a)` from precomputed logs, the
/// face density that makes the discrete Fisher information match the
/// exponentially fitted flux.
fn log_mean(a: f64, b: f64, ln_a: f64, ln_b: f64) -> f64 {
    let d = ln_b - ln_a;
    if d.abs() < 1e-6 {
        0.5 * (a + b)
    } else {
        (b - a) / d
    }
}

/// `(ε ∫∫ f |∇_m(log f + V)|², ν₂ ∫∫ |∇_x f|² / f)`; cells with `f = 0`
/// contribute nothing.
pub fn fisher_dissipation_in(f: &KineticDensity, gibbs: &Gibbs, epsilon: f64, nu2: f64) -> (f64, f64) {
    let mgrid = f.mgrid();
    let n = mgrid.n();
    let h = mgrid.spacing();
    let dx = f.grid().cell_area();
    let v = &gibbs.potential;
    let mut fm = 0.0;
    let mut logs = vec![0.0; mgrid.len()];
    for s in f.slices() {
        for (l, &x) in logs.iter_mut().zip(s) {
            *l = if x > 0.0 { x.ln() } else { f64::NAN };
        }
        let face = |l: usize, r: usize| {
            let (fl, fr) = (s[l], s[r]);
            if fl <= 0.0 || fr <= 0.0 {
                return 0.0;
            }
            let g = (logs[r] + v[r] - logs[l] - v[l]) / h;
            log_mean(fl, fr, logs[l], logs[r]) * g * g
        };
        for i1 in 0..n {
            for i2 in 0..n {
                let c = i1 * n + i2;
                if i1 + 1 < n {
                    fm += face(c, c + n);
                }
                if i2 + 1 < n {
                    fm += face(c, c + 1);
                }
            }
        }
    }
    fm *= epsilon * mgrid.cell_area() * dx;

    let mut fx = 0.0;
    if nu2 > 0.0 {
        let np = f.grid().len();
        let nc = mgrid.len();
        let mut column = vec![0.0; np];
        for c in 0..nc {
            for (p, slot) in column.iter_mut().enumerate() {
                *slot = f.data()[p * nc + c];
            }
            let field = crate::grid::SpectralField2D::from_values(f.grid(), column.clone());
            let (g1, g2) = (partial(&field, 0), partial(&field, 1));
            for p in 0..np {
                let val = column[p];
                if val > 0.0 {
                    fx += (g1.values()[p].powi(2) + g2.values()[p].powi(2)) / val;
                }
            }
        }
        fx *= nu2 * mgrid.cell_area() * dx;
    }
    (fm, fx)
}

pub fn fisher_dissipation(f: &KineticDensity, pot: &PotentialSpec, epsilon: f64, nu2: f64) -> (f64, f64) {
    fisher_dissipation_in(f, &Gibbs::new(pot, f.mgrid()), epsilon, nu2)
}

/// One diagnostics sample. Quantities a solver does not carry are NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    pub free_energy: f64,
    pub rel_entropy_global: f64,
    pub rel_entropy_local: f64,
    pub fisher_m: f64,
    pub fisher_x: f64,
    pub trace_stress_l1: f64,
    pub enstrophy: f64,
}

impl EnergyReport {
    pub fn empty(t: f64) -> Self {
        Self {
            t,
            kinetic: f64::NAN,
            free_energy: f64::NAN,
            rel_entropy_global: f64::NAN,
            rel_entropy_local: f64::NAN,
            fisher_m: f64::NAN,
            fisher_x: f64::NAN,
            trace_stress_l1: f64::NAN,
            enstrophy: f64::NAN,
        }
    }

    /// Fills the kinetic-density columns.
    pub fn with_density(mut self, f: &KineticDensity, gibbs: &Gibbs, epsilon: f64, nu2: f64) -> Self {
        self.free_energy = free_energy_in(f, gibbs);
        let (g, l) = relative_entropies_from(f, gibbs, self.free_energy);
        self.rel_entropy_global = g;
        self.rel_entropy_local = l;
        let (fm, fx) = fisher_dissipation_in(f, gibbs, epsilon, nu2);
        self.fisher_m = fm;
        self.fisher_x = fx;
        self
    }
}

/// Writes reports as CSV with the fixed column order.
pub fn write_energy_csv<W: Write>(writer: W, rows: &[EnergyReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of a monotonicity-type check over a history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck {
    /// Largest excess over the allowed value (≤ 0 when every sample passes).
    pub worst_violation: f64,
    /// Samples exceeding the tolerance.
    pub violations: usize,
    pub max_consecutive: usize,
    pub passed: bool,
}

fn monotone_check(values: &[f64], tol: f64, allowed_consecutive: usize) -> InequalityCheck {
    let mut worst = f64::NEG_INFINITY;
    let (mut violations, mut run, mut max_run) = (0, 0, 0);
    for w in values.windows(2) {
        let excess = w[1] - w[0] - tol;
        worst = worst.max(excess);
        if excess > 0.0 {
            violations += 1;
            run += 1;
            max_run = max_run.max(run);
        } else {
            run = 0;
        }
    }
    if values.len() < 2 {
        worst = 0.0;
    }
    let passed = if allowed_consecutive == 0 { violations == 0 } else { max_run < allowed_consecutive };
    InequalityCheck { worst_violation: worst, violations, max_consecutive: max_run, passed }
}

/// `½‖u‖² + K 𝓔[f]` must not grow by more than `tol` between samples.
pub fn coupled_energy_check(history: &[EnergyReport], k: f64, tol: f64) -> InequalityCheck {
    let total: Vec<f64> = history.iter().map(|r| r.kinetic + k * r.free_energy).collect();
    monotone_check(&total, tol, 0)
}

/// `rel_entropy_local + ‖u‖²/K` must not grow by more than `tol` per sample;
/// isolated violations are tolerated, three in a row fail.
pub fn free_energy_estimate_check(history: &[EnergyReport], k: f64, tol: f64) -> InequalityCheck {
    let total: Vec<f64> = history.iter().map(|r| r.rel_entropy_local + 2.0 * r.kinetic / k).collect();
    monotone_check(&total, tol, 3)
}

/// Running bound
/// `½‖u‖² + C‖Tr σ‖_{L¹} + ν₁∫₀ᵗ‖∇u‖² ≤ ½‖u₀‖² + C‖Tr σ₀‖_{L¹} + C·A‖M_{0,0}‖_{L¹}·t`
/// with `C = K/(2q(2q−1))` and `A = 2q(2q−1)(2q)²ε·max(1, A')`, `A' = 1`.
/// The time integral of the enstrophy uses the trapezoid rule.
pub fn trace_stress_bound(history: &[EnergyReport], k: f64, q: f64, epsilon: f64, nu1: f64, mass_l1: f64) -> InequalityCheck {
    let c = k / (2.0 * q * (2.0 * q - 1.0));
    let a = 2.0 * q * (2.0 * q - 1.0) * (2.0 * q).powi(2) * epsilon;
    let Some(first) = history.first() else {
        return InequalityCheck { worst_violation: 0.0, violations: 0, max_consecutive: 0, passed: true };
    };
    let initial = first.kinetic + c * first.trace_stress_l1;
    let mut dissipated = 0.0;
    let mut worst = f64::NEG_INFINITY;
    let (mut violations, mut run, mut max_run) = (0, 0, 0);
    for (i, r) in history.iter().enumerate() {
        if i > 0 {
            let prev = &history[i - 1];
            dissipated += 0.5 * (r.t - prev.t) * nu1 * (r.enstrophy + prev.enstrophy);
        }
        let lhs = r.kinetic + c * r.trace_stress_l1 + dissipated;
        let rhs = initial + c * a * mass_l1 * (r.t - first.t);
        let excess = lhs - rhs;
        worst = worst.max(excess);
        if excess > 1e-12 * rhs.abs().max(1.0) {
            violations += 1;
            run += 1;
            max_run = max_run.max(run);
        } else {
            run = 0;
        }
    }
    InequalityCheck { worst_violation: worst, violations, max_consecutive: max_run, passed: violations == 0 }
}

/// `min_x (½ Tr σ − |σ12|)`; nonnegative for stresses of nonnegative densities.
pub fn trace_dominance_margin(sigma: &StressField) -> f64 {
    sigma
        .s11
        .values()
        .iter()
        .zip(sigma.s12.values())
        .zip(sigma.s22.values())
        .map(|((a, b), c)| 0.5 * (a + c) - b.abs())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CkpOutcome {
    /// `∫ f log f − f log g − f + g`.
    pub kl: f64,
    /// `‖f − g‖_{L¹}`.
    pub l1: f64,
    pub passed: bool,
}

/// Csiszár–Kullback–Pinsker check on cell values with quadrature weight
/// `cell_area`. Inputs that do not integrate to one are normalized with a
/// warning.
pub fn ckp_check(f: &[f64], g: &[f64], cell_area: f64) -> CkpOutcome {
    assert_eq!(f.len(), g.len(), "densities must share a grid");
    let normalize = |v: &[f64], name: &str| {
        let m = v.iter().sum::<f64>() * cell_area;
        if (m - 1.0).abs() > 1e-12 {
            log::warn!("{name} integrates to {m}; normalized");
        }
        v.iter().map(|x| x / m).collect::<Vec<_>>()
    };
    let (f, g) = (normalize(f, "f"), normalize(g, "g"));
    let kl = f
        .iter()
        .zip(&g)
        .map(|(&a, &b)| phi(a) - if a > 0.0 { a * b.ln() } else { 0.0 } - a + b)
        .sum::<f64>()
        * cell_area;
    let l1 = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).sum::<f64>() * cell_area;
    CkpOutcome { kl, l1, passed: kl >= 0.5 * l1 * l1 - 1e-12 }
}

/// Scale of the bump widths `a_n = c/((n+1) log²(n+1))`, chosen so that
/// `Σ_{n≥1} a_n ≤ 1`; the unscaled series sums to about 2.11.
pub const PATHOLOGY_C: f64 = 0.474;

/// Half width of the n-th indicator bump, centred at `10 n`.
pub fn pathology_width(n: usize) -> f64 {
    let l = ((n + 1) as f64).ln();
    PATHOLOGY_C / ((n + 1) as f64 * l * l)
}

/// `2 Σ_{n ≤ n_max} a_n log a_n`.
pub fn pathology_bound_sum(n_max: usize) -> f64 {
    (1..=n_max).map(|n| 2.0 * phi(pathology_width(n))).sum()
}

/// Bumps up to this index are integrated by quadrature of the full sum;
/// beyond it they are narrow enough to be treated one at a time.
const PATHOLOGY_DENSE: usize = 2000;

/// `∫ Φ(f(x, t)) dx`, `Φ(s) = s log s`, for the heat flow `∂_t f = ∂_x² f`
/// started from `f₀ = Σ_{n=1}^{n_max} 1_{(10n − a_n, 10n + a_n)}`.
///
/// Bumps with `n ≤ 2000` are convolved exactly with the heat kernel (erf
/// form) and `Φ` of their sum is integrated by composite Simpson. Narrower
/// bumps are isolated: their heat profiles are `2a G_t + O(a³)` with `G_t`
/// the heat kernel, contributing `2a (log 2a − ½ log(4π e t))` each.
pub fn entropy_pathology_demo(n_max: usize, t: f64) -> f64 {
    if t == 0.0 || n_max == 0 {
        // Φ(0) = Φ(1) = 0
        return 0.0;
    }
    assert!(t > 0.0, "time must be nonnegative");
    let dense = n_max.min(PATHOLOGY_DENSE);
    let s = 2.0 * t.sqrt();
    let profile = |x: f64| -> f64 {
        let centre = (x / 10.0).round() as i64;
        let reach = (8.0 * s / 10.0).ceil() as i64 + 1;
        let mut acc = 0.0;
        for n in (centre - reach).max(1)..=(centre + reach).min(dense as i64) {
            let a = pathology_width(n as usize);
            let c = 10.0 * n as f64;
            acc += 0.5 * (erf((x - c + a) / s) - erf((x - c - a) / s));
        }
        acc
    };
    let margin = 10.0 * s + 10.0;
    let (lo, hi) = (10.0 - margin, 10.0 * dense as f64 + margin);
    // Simpson on unit cells subdivided finely enough for the kernel width
    let per_unit = ((40.0 / s).ceil() as usize).max(20) * 2;
    let h = 1.0 / per_unit as f64;
    let cells = (hi - lo).ceil() as usize;
    let mut total = 0.0;
    for cell in 0..cells {
        let x0 = lo + cell as f64;
        let mut sum = phi(profile(x0)) + phi(profile(x0 + 1.0));
        for i in 1..per_unit {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * phi(profile(x0 + i as f64 * h));
        }
        total += sum * h / 3.0;
    }
    let kernel_entropy = 0.5 * (4.0 * std::f64::consts::PI * std::f64::consts::E * t).ln();
    for n in dense + 1..=n_max {
        let a = pathology_width(n);
        total += 2.0 * a * ((2.0 * a).ln() - kernel_entropy);
    }
    total
}
