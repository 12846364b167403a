//! Built-in check batteries behind the `selftest` and `moments-selftest`
//! commands.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energetics::{ckp_check, entropy_pathology_demo};
use crate::fokker_planck::{equilibrium_density, CutoffProfile, FokkerPlanck, FpParams, KineticDensity, PotentialSpec};
use crate::grid::{gradient, leray_project, partial, Grid, SpectralField2D, VectorField2D};
use crate::hierarchy::{hierarchy_rhs, oldroyd_rhs, ClosureSpec, MomentFieldSet, OldroydState};
use crate::mgrid::MGrid;
use crate::moments::{
    kramer_stress_with_prefactor, moment, mollify, radial_moment, restoring_pairing, x_r_norm, DiscreteMeasure,
    MomentTable, StressField, XrVariant,
};
use crate::navier_stokes::{ns_step, FlowState, NsParams};

use super::{SimConfig, Snapshot};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestSummary {
    pub results: Vec<CheckResult>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

impl fmt::Display for SelftestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.results.len(), failed)
    }
}

/// Mutation hooks: a correct build must fail the self-test when one of these
/// is perturbed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelftestOptions {
    /// Prefactor used for Kramer's stress with `q = 1`; the correct value is 2.
    pub kramer_prefactor: f64,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { kramer_prefactor: 2.0, seed: 0 }
    }
}

type Check = std::result::Result<String, String>;

fn within(name: &str, err: f64, tol: f64) -> Check {
    if err <= tol {
        Ok(format!("{name} {err:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{name} {err:.3e} exceeds {tol:.0e}"))
    }
}

fn run_checks(checks: Vec<(&'static str, Box<dyn Fn() -> Check + '_>)>) -> SelftestSummary {
    let results = checks
        .into_iter()
        .map(|(name, check)| match check() {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(detail) => CheckResult { name, passed: false, detail },
        })
        .collect();
    SelftestSummary { results }
}

fn fail<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn selftest() -> SelftestSummary {
    selftest_with(SelftestOptions::default())
}

pub fn selftest_with(opts: SelftestOptions) -> SelftestSummary {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Check>)> = vec![
        (
            "spectral_derivative",
            Box::new(|| {
                let g = Grid::square(16).map_err(fail)?;
                let f = SpectralField2D::from_fn(&g, |x1, x2| (2.0 * x1).sin() * x2.cos());
                let exact = SpectralField2D::from_fn(&g, |x1, x2| 2.0 * (2.0 * x1).cos() * x2.cos());
                within("max error", partial(&f, 0).sub(&exact).max_abs(), 1e-12)
            }),
        ),
        (
            "leray_project",
            Box::new(|| {
                let g = Grid::square(16).map_err(fail)?;
                let phi = SpectralField2D::from_fn(&g, |x1, x2| (x1 + x2).sin() + (3.0 * x2).cos());
                let p = leray_project(&gradient(&phi));
                within("projected gradient", p.max_magnitude(), 1e-12)
            }),
        ),
        (
            "moment",
            Box::new(|| {
                let mu = DiscreteMeasure::new(vec![[1.0, 2.0], [-1.0, 0.5]], vec![0.5, 1.5]).map_err(fail)?;
                let err = (moment(&mu, 1, 1) - (0.5 * 2.0 - 1.5 * 0.5)).abs()
                    + (radial_moment(&mu, 2) - (0.5 * 5.0 + 1.5 * 1.25)).abs();
                within("error", err, 1e-14)
            }),
        ),
        (
            "kramer_stress",
            Box::new(move || {
                let g = Grid::square(4).map_err(fail)?;
                let mg = MGrid::new(48, 6.0).map_err(fail)?;
                let slice = equilibrium_density(&PotentialSpec::hookean(), &mg).map_err(fail)?;
                let f = KineticDensity::separable(&g, mg, &SpectralField2D::constant(&g, 1.0), &slice).map_err(fail)?;
                let s = kramer_stress_with_prefactor(&f, 1.0, opts.kramer_prefactor).map_err(fail)?;
                within("equilibrium stress minus identity", s.max_abs_difference(&StressField::uniform(&g, [1.0, 0.0, 1.0])), 1e-8)
            }),
        ),
        (
            "fp_step",
            Box::new(|| {
                let g = Grid::square(4).map_err(fail)?;
                let mg = MGrid::new(24, 6.0).map_err(fail)?;
                let pot = PotentialSpec::hookean();
                let cutoff = CutoffProfile::new(3.0).map_err(fail)?;
                let slice = crate::fokker_planck::truncated_equilibrium(&pot, &cutoff, &mg);
                let mut f = KineticDensity::separable(&g, mg.clone(), &SpectralField2D::constant(&g, 1.0), &slice)
                    .map_err(fail)?;
                let f0 = f.clone();
                let solver = FokkerPlanck::new(FpParams { epsilon: 1.0, nu2: 1.0 }, pot, cutoff, mg);
                for _ in 0..5 {
                    solver.step(&mut f, &VectorField2D::zeros(&g), 0.01).map_err(fail)?;
                }
                within("equilibrium drift (L1)", f.l1_distance(&f0), 1e-10)
            }),
        ),
        (
            "hierarchy_oldroyd_identity",
            Box::new(move || {
                let g = Grid::square(8).map_err(fail)?;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let field = |rng: &mut ChaCha8Rng| {
                    let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
                    SpectralField2D::from_fn(&g, |x1, x2| c + a * x1.sin() * x2.cos() + b * (x1 + 2.0 * x2).cos())
                };
                let fields: Vec<_> = (0..6).map(|_| field(&mut rng)).collect();
                let u = VectorField2D::new(field(&mut rng), field(&mut rng));
                let m = MomentFieldSet::new(2, 1, ClosureSpec::exact_hookean(), fields.clone()).map_err(fail)?;
                // σ = 2 M_2, ρ = M_00
                let o = OldroydState::new(
                    StressField::new(fields[3].scale(2.0), fields[4].scale(2.0), fields[5].scale(2.0)),
                    fields[0].clone(),
                );
                let h = hierarchy_rhs(&m, &u, 0.7);
                let r = oldroyd_rhs(&o, &u, 0.7);
                let err = [(3, 0), (4, 1), (5, 2)]
                    .iter()
                    .map(|&(i, j)| h[i].scale(2.0).sub(&r[j]).max_abs())
                    .chain(std::iter::once(h[0].sub(&r[3]).max_abs()))
                    .fold(0.0, f64::max);
                within("max difference", err, 1e-12)
            }),
        ),
        (
            "taylor_green",
            Box::new(|| {
                let g = Grid::square(16).map_err(fail)?;
                let mut s = FlowState::taylor_green(&g, 0.5);
                let w0 = s.omega().clone();
                let zero = StressField::zeros(&g);
                for _ in 0..100 {
                    s = ns_step(&s, &zero, NsParams { nu1: 1.0, k: 1.0 }, 1e-3).map_err(fail)?;
                }
                let exact = w0.scale((-2.0 * s.t).exp());
                within("relative vorticity error", s.omega().sub(&exact).max_abs() / exact.max_abs(), 1e-6)
            }),
        ),
        (
            "entropy_pathology",
            Box::new(|| {
                let v = entropy_pathology_demo(100, 0.0);
                if v != 0.0 {
                    return Err(format!("t = 0 gives {v}, expected 0"));
                }
                let (a, b) = (entropy_pathology_demo(10, 1.0), entropy_pathology_demo(20, 1.0));
                if b < a {
                    Ok(format!("0 at t = 0; {a:.4} > {b:.4} at t = 1"))
                } else {
                    Err(format!("not decreasing in n_max: {a} then {b}"))
                }
            }),
        ),
        (
            "ckp_check",
            Box::new(|| {
                let mg = MGrid::new(32, 6.0).map_err(fail)?;
                let f = mg.sample(|a, b| (-(a - 0.5).powi(2) - b * b).exp() / std::f64::consts::PI);
                let g = mg.sample(|a, b| (-a * a - b * b).exp() / std::f64::consts::PI);
                let c = ckp_check(&f, &g, mg.cell_area());
                if c.passed {
                    Ok(format!("kl {:.4e} >= l1²/2 {:.4e}", c.kl, 0.5 * c.l1 * c.l1))
                } else {
                    Err(format!("kl {} below l1²/2 {}", c.kl, 0.5 * c.l1 * c.l1))
                }
            }),
        ),
        (
            "load_config",
            Box::new(|| {
                let e = SimConfig::parse("T = 1\nq = 2\nsolver = oldroyd_b\n").err().ok_or("q = 2 accepted")?;
                if !e.to_string().contains("exact closure requires q=1") {
                    return Err(format!("unexpected message: {e}"));
                }
                let e = SimConfig::parse("T = 1\nL_m = 4\nalpha = 3\n").err().ok_or("alpha > L_m/2 accepted")?;
                let msg = e.to_string();
                if msg.contains("alpha") && msg.contains("L_m") {
                    Ok("invariants named".into())
                } else {
                    Err(format!("unexpected message: {msg}"))
                }
            }),
        ),
        (
            "snapshot",
            Box::new(|| {
                let s = Snapshot {
                    config_hash: [1; 32],
                    t: 1.0 / 3.0,
                    step: 9,
                    dims: [2, 2, 0],
                    fields: vec![("omega".into(), vec![0.1, -2.5, 1e-300, f64::MAX])],
                };
                let back = Snapshot::from_bytes(&s.to_bytes()).map_err(fail)?;
                if back.bit_identical(&s) {
                    Ok("round trip bit-identical".into())
                } else {
                    Err("round trip changed bits".into())
                }
            }),
        ),
        (
            "restoring_positivity",
            Box::new(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
                let min = (0..200)
                    .map(|_| restoring_pairing(&random_measure(&mut rng), &random_measure(&mut rng), rng.gen_range(0..4)))
                    .fold(f64::INFINITY, f64::min);
                if min >= -1e-12 {
                    Ok(format!("min {min:.3e} over 200 pairs"))
                } else {
                    Err(format!("min {min:.3e} below -1e-12"))
                }
            }),
        ),
    ];
    run_checks(checks)
}

fn random_measure(rng: &mut ChaCha8Rng) -> DiscreteMeasure {
    let n = rng.gen_range(1..6);
    let points = (0..n).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
    let weights = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    DiscreteMeasure::new(points, weights).expect("positive weights")
}

/// `E[(y + z)^n]`, `z ~ N(0, δ²)`, by `E_n = y E_{n-1} + (n-1) δ² E_{n-2}`.
fn shifted_gaussian_moments(y: f64, delta: f64, n: usize) -> Vec<f64> {
    let mut e = vec![1.0, y];
    for k in 2..=n {
        e.push(y * e[k - 1] + (k - 1) as f64 * delta * delta * e[k - 2]);
    }
    e.truncate(n + 1);
    e
}

/// Mollification identities, restoring-force positivity, norm equivalence
/// and the exponential-tail fixture.
pub fn moments_selftest(seed: u64) -> SelftestSummary {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Check>)> = vec![
        (
            "mollification_identities",
            Box::new(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let degree = 6;
                let mut worst: f64 = 0.0;
                for _ in 0..100 {
                    let mu = random_measure(&mut rng);
                    let delta = rng.gen_range(0.05..1.0);
                    let table = mollify(&mu, delta, degree);
                    let e: Vec<_> = mu
                        .points()
                        .iter()
                        .map(|p| (shifted_gaussian_moments(p[0], delta, degree), shifted_gaussian_moments(p[1], delta, degree)))
                        .collect();
                    for (a, b, v) in table.entries() {
                        let exact: f64 = e.iter().zip(mu.weights()).map(|((e1, e2), w)| w * e1[a] * e2[b]).sum();
                        let scale: f64 = e.iter().zip(mu.weights()).map(|((e1, e2), w)| (w * e1[a] * e2[b]).abs()).sum();
                        worst = worst.max((v - exact).abs() / scale.max(1.0));
                    }
                }
                within("relative error over 100 measures", worst, 1e-12)
            }),
        ),
        (
            "restoring_positivity",
            Box::new(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
                let min = (0..1000)
                    .map(|_| restoring_pairing(&random_measure(&mut rng), &random_measure(&mut rng), rng.gen_range(0..5)))
                    .fold(f64::INFINITY, f64::min);
                if min >= -1e-12 {
                    Ok(format!("min {min:.3e} over 1000 pairs"))
                } else {
                    Err(format!("min {min:.3e} below -1e-12"))
                }
            }),
        ),
        (
            "norm_equivalence",
            Box::new(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
                let mut worst_ratio: f64 = 0.0;
                for _ in 0..100 {
                    let tables: Vec<MomentTable> =
                        (0..4).map(|_| MomentTable::from_measure(&random_measure(&mut rng), 16)).collect();
                    let r = rng.gen_range(0.1..2.0);
                    let full = x_r_norm(&tables, 0.25, r, XrVariant::Full).value;
                    let even = x_r_norm(&tables, 0.25, r, XrVariant::Even).value;
                    if even > full * (1.0 + 1e-12) {
                        return Err(format!("F^e = {even} exceeds F = {full} at r = {r}"));
                    }
                    worst_ratio = worst_ratio.max(full / even);
                }
                if worst_ratio <= 3.0 {
                    Ok(format!("F^e <= F, largest F/F^e = {worst_ratio:.4}"))
                } else {
                    Err(format!("F/F^e reached {worst_ratio}"))
                }
            }),
        ),
        (
            "exponential_tail_fixture",
            Box::new(|| {
                let c = 1.3;
                let mu = exponential_tail_measure(c);
                let mut fact = 1.0;
                let mut worst: f64 = 0.0;
                for k in 0..=8usize {
                    fact *= (k + 1) as f64;
                    worst = worst.max((radial_moment(&mu, k) / (fact * c) - 1.0).abs());
                }
                within("relative error of M̄_k = (k+1)! c, k <= 8", worst, 1e-10)
            }),
        ),
    ];
    run_checks(checks)
}

/// `c e^{-|m|} / 2π` as a polar quadrature measure.
pub(crate) fn exponential_tail_measure(c: f64) -> DiscreteMeasure {
    DiscreteMeasure::polar_quadrature(|r| c * (-r).exp() / (2.0 * std::f64::consts::PI), 80.0, 20_000, 16)
}
