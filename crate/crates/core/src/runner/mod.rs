//! Configuration, the coupled time loop, persistence and the command
//! implementations behind the CLI.

mod config;
mod selftest;
mod snapshot;

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{load_config, DtPolicy, InitialDensity, InitialVelocity, SimConfig, SolverKind};
pub use selftest::{moments_selftest, selftest, selftest_with, CheckResult, SelftestOptions, SelftestSummary};
pub use snapshot::Snapshot;

use crate::energetics::{trace_dominance_margin, write_energy_csv, EnergyReport, Gibbs};
use crate::error::{Error, Result};
use crate::fokker_planck::{
    equilibrium_density, exponential_tail, stretched_gaussian, CutoffProfile, FokkerPlanck, FpParams, KineticDensity,
    PotentialSpec,
};
use crate::grid::{Grid, SpectralField2D, VectorField2D};
use crate::hierarchy::{
    closure_consistency_check, hierarchy_step, oldroyd_b_step, stress_from_moments, MomentFieldSet, OldroydState,
};
use crate::mgrid::MGrid;
use crate::moments::{kramer_stress, StressField};
use crate::navier_stokes::{enstrophy, kinetic_energy, ns_step, FlowState, NsParams};

/// Consecutive rejected attempts (each with half the previous step) before a
/// run is aborted.
pub const MAX_REJECTIONS: usize = 3;

/// One row of `closure.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureRow {
    pub t: f64,
    pub l2_diff: f64,
    pub linf_diff: f64,
}

/// Summary of a finished (or aborted) run.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub t: f64,
    pub steps: u64,
    /// Rejected step attempts, including those later retried successfully.
    pub rejections: usize,
    pub energy: Vec<EnergyReport>,
    pub closure: Vec<ClosureRow>,
    /// Largest `|mass(t) − mass(0)| / mass(0)` seen at a sample.
    pub mass_drift: f64,
    /// Largest clipped mass fraction of any kinetic step.
    pub max_clipped_mass: f64,
    /// Smallest `½ Tr σ − |σ12|` over all grid points and samples.
    pub min_trace_margin: f64,
}

struct Kinetic {
    solver: FokkerPlanck,
    f: KineticDensity,
    gibbs: Gibbs,
}

/// Full coupled state. The flow is advanced first with the stress of the
/// current state, then every micro solver with the new velocity.
pub struct Simulation {
    config: SimConfig,
    grid: Arc<Grid>,
    pot: PotentialSpec,
    flow: FlowState,
    frozen_flow: bool,
    kinetic: Option<Kinetic>,
    oldroyd: Option<OldroydState>,
    hierarchy: Option<MomentFieldSet>,
    t: f64,
    step: u64,
    initial_mass: f64,
    report: RunReport,
}

fn initial_velocity(config: &SimConfig, grid: &Arc<Grid>) -> FlowState {
    let amp = config.u_amplitude;
    match config.initial_u {
        InitialVelocity::TaylorGreen => FlowState::taylor_green(grid, amp),
        InitialVelocity::Zero => FlowState::new(SpectralField2D::zeros(grid), 0.0),
        InitialVelocity::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut modes = Vec::new();
            for k1 in -3i32..=3 {
                for k2 in 0i32..=3 {
                    let kk = k1 * k1 + k2 * k2;
                    if kk == 0 || kk > 9 || (k2 == 0 && k1 < 0) {
                        continue;
                    }
                    modes.push((k1 as f64, k2 as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            let omega = SpectralField2D::from_fn(grid, |x1, x2| {
                modes.iter().map(|(k1, k2, a, b)| a * (k1 * x1 + k2 * x2).cos() + b * (k1 * x1 + k2 * x2).sin()).sum()
            });
            // same kinetic energy as a Taylor–Green field of this amplitude
            let raw = FlowState::new(omega, 0.0);
            let e = kinetic_energy(&raw);
            let scale = if e > 0.0 { (amp * amp * PI * PI / e).sqrt() } else { 0.0 };
            FlowState::new(raw.omega().scale(scale), 0.0)
        }
    }
}

fn initial_slice(config: &SimConfig, pot: &PotentialSpec, mgrid: &MGrid) -> Result<Vec<f64>> {
    match config.initial_f {
        InitialDensity::Equilibrium => {
            // e^{-U} normalized on the grid itself, so the initial state is
            // discretely normalized even where the quadrature is coarse
            if let Err(e) = equilibrium_density(pot, mgrid) {
                log::warn!("equilibrium initial density: {e}");
            }
            Ok(Gibbs::new(pot, mgrid).density())
        }
        InitialDensity::StretchedGaussian => Ok(stretched_gaussian(pot, config.f_c, mgrid)),
        InitialDensity::ExponentialTail => Ok(exponential_tail(mgrid).into_iter().map(|v| v * config.f_c).collect()),
    }
}

fn is_recoverable(e: &Error) -> bool {
    matches!(e, Error::StepRejected(_) | Error::Stability(_) | Error::NonFinite(_))
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let grid = Grid::square(config.nx)?;
        let pot = PotentialSpec::new(config.q)?;
        let flow = initial_velocity(&config, &grid);
        let needs_density = config.solver.has_kinetic()
            || config.solver.has_oldroyd()
            || config.solver == SolverKind::Hierarchy;
        let f0 = if needs_density {
            let mgrid = MGrid::new(config.nm, config.l_m)?;
            let slice = initial_slice(&config, &pot, &mgrid)?;
            Some(KineticDensity::separable(&grid, mgrid, &SpectralField2D::constant(&grid, 1.0), &slice)?)
        } else {
            None
        };
        let oldroyd = match (&f0, config.solver.has_oldroyd()) {
            (Some(f), true) => Some(OldroydState::from_density(f)?),
            _ => None,
        };
        let hierarchy = match (&f0, config.solver) {
            (Some(f), SolverKind::Hierarchy) => {
                Some(MomentFieldSet::from_density(f, config.hierarchy_degree, &pot, config.closure)?)
            }
            _ => None,
        };
        let initial_mass = f0.as_ref().map_or(0.0, KineticDensity::mass);
        let kinetic = match f0 {
            Some(f) if config.solver.has_kinetic() => {
                let cutoff = CutoffProfile::new(config.alpha)?;
                let mgrid = f.mgrid().clone();
                let gibbs = Gibbs::truncated(&pot, &cutoff, &mgrid);
                let params = FpParams { epsilon: config.epsilon, nu2: config.nu2 };
                Some(Kinetic { solver: FokkerPlanck::new(params, pot, cutoff, mgrid), f, gibbs })
            }
            _ => None,
        };
        Ok(Self {
            config,
            grid,
            pot,
            flow,
            frozen_flow: false,
            kinetic,
            oldroyd,
            hierarchy,
            t: 0.0,
            step: 0,
            initial_mass,
            report: RunReport { min_trace_margin: f64::INFINITY, ..RunReport::default() },
        })
    }

    /// Holds `u ≡ 0`: the flow is never stepped.
    pub fn with_frozen_flow(mut self) -> Self {
        self.flow = FlowState::new(SpectralField2D::zeros(&self.grid), self.t);
        self.frozen_flow = true;
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn flow(&self) -> &FlowState {
        &self.flow
    }

    pub fn density(&self) -> Option<&KineticDensity> {
        self.kinetic.as_ref().map(|k| &k.f)
    }

    pub fn oldroyd(&self) -> Option<&OldroydState> {
        self.oldroyd.as_ref()
    }

    pub fn hierarchy(&self) -> Option<&MomentFieldSet> {
        self.hierarchy.as_ref()
    }

    pub fn report(&self) -> &RunReport {
        &self.report
    }

    /// Stress that forces the flow: kinetic when present, else macroscopic.
    pub fn driving_stress(&self) -> Result<StressField> {
        if let Some(k) = &self.kinetic {
            kramer_stress(&k.f, self.pot.q())
        } else if let Some(o) = &self.oldroyd {
            Ok(o.stress.clone())
        } else if let Some(h) = &self.hierarchy {
            stress_from_moments(h)
        } else {
            Ok(StressField::zeros(&self.grid))
        }
    }

    fn policy_dt(&self) -> f64 {
        match self.config.dt {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Auto { max } => {
                let u = self.flow.velocity();
                let x_rate = u.u1.max_abs() / self.grid.dx1() + u.u2.max_abs() / self.grid.dx2();
                let mut dt = if x_rate > 0.0 { 0.9 / x_rate } else { f64::INFINITY };
                if let Some(k) = &self.kinetic {
                    dt = dt.min(k.solver.suggest_dt(&k.f, u).dt);
                }
                dt.min(max)
            }
        }
    }

    /// Records a diagnostics row for the current state.
    pub fn sample(&mut self) -> Result<()> {
        let sigma = self.driving_stress()?;
        let mut row = EnergyReport::empty(self.t);
        row.kinetic = kinetic_energy(&self.flow);
        row.enstrophy = enstrophy(&self.flow);
        row.trace_stress_l1 = sigma.trace().l1_norm();
        self.report.min_trace_margin = self.report.min_trace_margin.min(trace_dominance_margin(&sigma));
        let mass = if let Some(k) = &self.kinetic {
            row = row.with_density(&k.f, &k.gibbs, self.config.epsilon, self.config.nu2);
            Some(k.f.mass())
        } else if let Some(o) = &self.oldroyd {
            Some(o.rho.integral())
        } else {
            self.hierarchy.as_ref().map(|h| h.fields()[0].integral())
        };
        if let Some(m) = mass {
            let drift = ((m - self.initial_mass) / self.initial_mass).abs();
            self.report.mass_drift = self.report.mass_drift.max(drift);
        }
        self.report.energy.push(row);
        if let (Some(k), Some(o)) = (&self.kinetic, &self.oldroyd) {
            let c = closure_consistency_check(&k.f, &o.stress)?;
            self.report.closure.push(ClosureRow { t: self.t, l2_diff: c.l2_diff, linf_diff: c.linf_diff });
        }
        Ok(())
    }

    /// Advances every component by `dt`; on error the state is untouched.
    fn try_step(&mut self, dt: f64, landing: Option<f64>) -> Result<()> {
        let sigma = self.driving_stress()?;
        let params = NsParams { nu1: self.config.nu1, k: self.config.k };
        let mut flow = if self.frozen_flow {
            FlowState::new(self.flow.omega().clone(), self.flow.t + dt)
        } else {
            ns_step(&self.flow, &sigma, params, dt)?
        };
        let u: VectorField2D = flow.velocity().clone();
        let (eps, nu2) = (self.config.epsilon, self.config.nu2);
        let mut clipped = 0.0;
        let f = match &self.kinetic {
            Some(k) => {
                let mut f = k.f.clone();
                clipped = k.solver.step(&mut f, &u, dt)?.clipped_mass;
                Some(f)
            }
            None => None,
        };
        let oldroyd = self.oldroyd.as_ref().map(|o| oldroyd_b_step(o, &u, eps, nu2, dt)).transpose()?;
        let hierarchy = self.hierarchy.as_ref().map(|h| hierarchy_step(h, &u, eps, nu2, dt)).transpose()?;

        // commit
        let mut t = self.t + dt;
        if let Some(target) = landing {
            t = target;
            flow.t = target;
        }
        self.flow = flow;
        if let (Some(k), Some(f)) = (self.kinetic.as_mut(), f) {
            k.f = f;
        }
        if oldroyd.is_some() {
            self.oldroyd = oldroyd;
        }
        if hierarchy.is_some() {
            self.hierarchy = hierarchy;
        }
        self.t = t;
        assert_eq!(self.flow.t.to_bits(), self.t.to_bits(), "flow and micro state out of step");
        self.step += 1;
        self.report.max_clipped_mass = self.report.max_clipped_mass.max(clipped);
        Ok(())
    }

    /// Runs to the configured final time, sampling and snapshotting on the
    /// way. Output files are written when an output directory is set.
    pub fn run(&mut self) -> Result<RunReport> {
        let result = self.run_inner();
        if let Err(e) = &result {
            log::error!("run aborted at t = {}: {e}", self.t);
            if let Some(dir) = self.config.output_dir.clone() {
                self.snapshot().save(&dir.join(format!("state_{}.pksn", self.step)))?;
                self.write_outputs(&dir)?;
            }
        }
        result
    }

    fn run_inner(&mut self) -> Result<RunReport> {
        if let Some(dir) = &self.config.output_dir {
            std::fs::create_dir_all(dir)?;
        }
        let t_final = self.config.t_final;
        if self.report.energy.is_empty() {
            self.sample()?;
        }
        let mut sample_k = self.config.sample_interval.map_or(0, |s| (self.t / s).round() as u64);
        let mut snap_k = self.config.snapshot_interval.map_or(0, |s| (self.t / s).round() as u64);
        let tiny = 1e-9 * t_final.max(1.0);
        while self.t < t_final - tiny {
            let next_sample = self.config.sample_interval.map(|s| ((sample_k + 1) as f64 * s).min(t_final));
            let next_snap = self.config.snapshot_interval.map(|s| ((snap_k + 1) as f64 * s).min(t_final));
            let stop = [Some(t_final), next_sample, next_snap].into_iter().flatten().fold(f64::INFINITY, f64::min);
            let mut dt = self.policy_dt();
            let mut failures = 0;
            loop {
                let landing = (self.t + dt >= stop - tiny).then_some(stop);
                let this_dt = landing.map_or(dt, |s| s - self.t);
                match self.try_step(this_dt, landing) {
                    Ok(()) => break,
                    Err(e) if is_recoverable(&e) => {
                        failures += 1;
                        self.report.rejections += 1;
                        log::warn!("step at t = {} with dt = {this_dt:.3e} rejected: {e}", self.t);
                        if failures >= MAX_REJECTIONS {
                            return Err(Error::StepRejected(format!(
                                "{MAX_REJECTIONS} consecutive rejections at t = {}: {e}",
                                self.t
                            )));
                        }
                        dt = 0.5 * this_dt;
                    }
                    Err(e) => return Err(e),
                }
            }
            let now = self.t;
            let at = |target: Option<f64>| target.is_some_and(|s| (now - s).abs() <= tiny);
            let (sample_now, snap_now) = (at(next_sample), at(next_snap));
            if self.config.sample_interval.is_none() || sample_now {
                if self.config.sample_interval.is_some() {
                    sample_k += 1;
                }
                self.sample()?;
            }
            if snap_now {
                snap_k += 1;
                if let Some(dir) = &self.config.output_dir {
                    self.snapshot().save(&dir.join(format!("state_{}.pksn", self.step)))?;
                }
            }
        }
        if let Some(dir) = self.config.output_dir.clone() {
            self.write_outputs(&dir)?;
        }
        self.report.t = self.t;
        self.report.steps = self.step;
        Ok(self.report.clone())
    }

    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_energy_csv(BufWriter::new(File::create(dir.join("energy.csv"))?), &self.report.energy)?;
        if !self.report.closure.is_empty() {
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("closure.csv"))?));
            for row in &self.report.closure {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Ok(())
    }

    /// Exact copy of the evolving state.
    pub fn snapshot(&self) -> Snapshot {
        let mut fields = vec![("omega".to_string(), self.flow.omega().values().to_vec())];
        if let Some(k) = &self.kinetic {
            fields.push(("f".into(), k.f.data().to_vec()));
        }
        if let Some(o) = &self.oldroyd {
            for (name, v) in [("s11", &o.stress.s11), ("s12", &o.stress.s12), ("s22", &o.stress.s22), ("rho", &o.rho)] {
                fields.push((name.into(), v.values().to_vec()));
            }
        }
        if let Some(h) = &self.hierarchy {
            let degree = h.degree();
            let names = (0..=degree).flat_map(|d| (0..=d).map(move |b| format!("M_{}_{}", d - b, b)));
            for (name, v) in names.zip(h.fields()) {
                fields.push((name, v.values().to_vec()));
            }
        }
        let nm = self.kinetic.as_ref().map_or(0, |k| k.f.mgrid().n() as u32);
        Snapshot {
            config_hash: self.config.hash(),
            t: self.t,
            step: self.step,
            dims: [self.grid.nx() as u32, self.grid.ny() as u32, nm],
            fields,
        }
    }

    /// Resumes from a snapshot written by a run of the same configuration.
    /// Diagnostics history restarts empty.
    pub fn restore(config: SimConfig, snap: &Snapshot) -> Result<Self> {
        if snap.config_hash != config.hash() {
            return Err(Error::Snapshot("snapshot was written by a different configuration".into()));
        }
        let mut sim = Self::new(config)?;
        let field = |name: &str| {
            snap.field(name).ok_or_else(|| Error::Snapshot(format!("snapshot has no field `{name}`")))
        };
        let grid = Arc::clone(&sim.grid);
        let spectral = |name: &str| -> Result<SpectralField2D> {
            let v = field(name)?;
            if v.len() != grid.len() {
                return Err(Error::Snapshot(format!("field `{name}` has the wrong length")));
            }
            Ok(SpectralField2D::from_values(&grid, v.to_vec()))
        };
        sim.flow = FlowState::new(spectral("omega")?, snap.t);
        if let Some(k) = sim.kinetic.as_mut() {
            k.f = KineticDensity::new(&grid, k.f.mgrid().clone(), field("f")?.to_vec())?;
        }
        if sim.oldroyd.is_some() {
            let stress = StressField::new(spectral("s11")?, spectral("s12")?, spectral("s22")?);
            sim.oldroyd = Some(OldroydState::new(stress, spectral("rho")?));
        }
        if let Some(h) = &sim.hierarchy {
            let degree = h.degree();
            let fields = (0..=degree)
                .flat_map(|d| (0..=d).map(move |b| format!("M_{}_{}", d - b, b)))
                .map(|n| spectral(&n))
                .collect::<Result<Vec<_>>>()?;
            sim.hierarchy = Some(MomentFieldSet::new(degree, h.q(), h.closure(), fields)?);
        }
        sim.t = snap.t;
        sim.step = snap.step;
        Ok(sim)
    }
}

/// Runs a configuration to completion.
pub fn run(config: SimConfig) -> Result<RunReport> {
    Simulation::new(config)?.run()
}

/// Kinetic and Oldroyd-B side by side, the flow forced by the kinetic stress.
pub fn verify_closure(config: SimConfig) -> Result<RunReport> {
    if config.q != 1.0 {
        return Err(Error::Config("exact closure requires q=1".into()));
    }
    run(SimConfig { solver: SolverKind::Both, ..config })
}

/// Outcome of a relaxation run with `u ≡ 0`.
#[derive(Clone, Debug)]
pub struct RelaxReport {
    pub t: f64,
    /// `‖f − f_eq‖_{L¹}` at the start and end, `f_eq = ρ e^{-U_α}/Z`.
    pub l1_initial: f64,
    pub l1_final: f64,
    /// `max_x |σ − ρ𝕀|` at the end.
    pub stress_deviation: f64,
    /// `max_x |σ − (ρ𝕀 + (σ₀ − ρ𝕀) e^{−4εt})|` at the end (q = 1 only).
    pub analytic_difference: Option<f64>,
    /// The same with rate `2ε`, for comparison.
    pub analytic_difference_rate_2eps: Option<f64>,
    pub run: RunReport,
}

fn equilibrium_of(f: &KineticDensity, gibbs: &Gibbs) -> Result<KineticDensity> {
    let rho = f.density_field();
    KineticDensity::separable(f.grid(), f.mgrid().clone(), &rho, &gibbs.density())
}

fn max_stress_gap(sigma: &StressField, target: &StressField) -> f64 {
    sigma.max_abs_difference(target)
}

/// Relaxation toward equilibrium with the flow held at rest.
pub fn relax(config: SimConfig) -> Result<RelaxReport> {
    let solver = if config.q == 1.0 { SolverKind::Both } else { SolverKind::Kinetic };
    let config = SimConfig { solver, initial_u: InitialVelocity::Zero, ..config };
    let eps = config.epsilon;
    let mut sim = Simulation::new(config)?.with_frozen_flow();
    let (l1_initial, sigma0) = {
        let k = sim.kinetic.as_ref().expect("relax runs the kinetic solver");
        (k.f.l1_distance(&equilibrium_of(&k.f, &k.gibbs)?), kramer_stress(&k.f, sim.pot.q())?)
    };
    let run = sim.run()?;
    let k = sim.kinetic.as_ref().expect("relax runs the kinetic solver");
    let l1_final = k.f.l1_distance(&equilibrium_of(&k.f, &k.gibbs)?);
    let sigma = kramer_stress(&k.f, sim.pot.q())?;
    let rho = k.f.density_field();
    let iso = StressField::new(rho.clone(), SpectralField2D::zeros(&sim.grid), rho.clone());
    let stress_deviation = max_stress_gap(&sigma, &iso);
    let analytic = |rate: f64| {
        let decay = (-rate * eps * sim.t).exp();
        let target = iso.add(&sigma0.add(&iso.scale(-1.0)).scale(decay));
        max_stress_gap(&sigma, &target)
    };
    let (analytic_difference, analytic_difference_rate_2eps) =
        if sim.pot.q() == 1.0 { (Some(analytic(4.0)), Some(analytic(2.0))) } else { (None, None) };
    Ok(RelaxReport {
        t: sim.t,
        l1_initial,
        l1_final,
        stress_deviation,
        analytic_difference,
        analytic_difference_rate_2eps,
        run,
    })
}

/// Applies command-line overrides.
pub fn with_overrides(mut config: SimConfig, output_dir: Option<PathBuf>, seed: Option<u64>) -> SimConfig {
    if output_dir.is_some() {
        config.output_dir = output_dir;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> SimConfig {
        SimConfig::parse(&format!("nx = 8\nnm = 16\nL_m = 6\nnu2 = 0.5\n{extra}")).unwrap()
    }

    #[test]
    fn zero_horizon_gives_initial_row_only() {
        let r = run(small("T = 0\ndt = 0.01\n")).unwrap();
        assert_eq!(r.energy.len(), 1);
        assert_eq!(r.steps, 0);
        assert_eq!(r.energy[0].t, 0.0);
    }

    #[test]
    fn both_solvers_emit_closure_rows() {
        let r = run(small("T = 0.05\ndt = 0.01\nsolver = both\n")).unwrap();
        assert_eq!(r.closure.len(), r.energy.len());
        assert_eq!(r.steps, 5);
        assert!((r.t - 0.05).abs() < 1e-15);
        assert!(r.closure.last().unwrap().l2_diff < 0.05);
    }

    #[test]
    fn samples_land_on_interval_multiples() {
        let r = run(small("T = 0.1\ndt = 0.015\nsample_interval = 0.025\nsolver = oldroyd_b\n")).unwrap();
        let times: Vec<f64> = r.energy.iter().map(|e| e.t).collect();
        assert_eq!(times.len(), 5);
        for (i, t) in times.iter().enumerate() {
            assert!((t - 0.025 * i as f64).abs() < 1e-12, "{times:?}");
        }
    }

    #[test]
    fn oversized_step_is_halved_until_accepted() {
        // CFL with |u| = 0.5 on an 8-point grid allows dt ≈ 0.78
        let r = run(small("T = 1.0\ndt = 2.0\nsolver = oldroyd_b\n")).unwrap();
        assert!(r.rejections >= 1);
        assert!((r.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_rejection_aborts() {
        let e = run(small("T = 10.0\ndt = 8.0\nsolver = oldroyd_b\nu_amplitude = 2\n")).unwrap_err();
        assert!(e.to_string().contains("consecutive rejections"), "{e}");
    }

    #[test]
    fn hierarchy_matches_oldroyd_driver() {
        let a = run(small("T = 0.05\ndt = 0.01\nsolver = hierarchy\n")).unwrap();
        let b = run(small("T = 0.05\ndt = 0.01\nsolver = oldroyd_b\n")).unwrap();
        for (x, y) in a.energy.iter().zip(&b.energy) {
            assert!((x.kinetic - y.kinetic).abs() < 1e-12);
            assert!((x.trace_stress_l1 - y.trace_stress_l1).abs() < 1e-10);
        }
    }

    #[test]
    fn snapshot_restore_resumes_exactly() {
        let cfg = small("T = 0.04\ndt = 0.01\nsolver = both\n");
        let mut a = Simulation::new(cfg.clone()).unwrap();
        a.run().unwrap();
        let mut half = Simulation::new(SimConfig { t_final: 0.02, ..cfg.clone() }).unwrap();
        half.run().unwrap();
        let snap = half.snapshot();
        // the hash covers T, so resume under the full configuration's hash
        let snap = Snapshot { config_hash: cfg.hash(), ..snap };
        let mut b = Simulation::restore(cfg, &snap).unwrap();
        b.run().unwrap();
        assert!(a.snapshot().bit_identical(&b.snapshot()));
    }
}
