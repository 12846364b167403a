//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hierarchy::{ClosureKind, ClosureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Kinetic,
    Hierarchy,
    OldroydB,
    /// Kinetic solver driving the flow, Oldroyd-B carried alongside.
    Both,
}

impl SolverKind {
    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Kinetic => "kinetic",
            SolverKind::Hierarchy => "hierarchy",
            SolverKind::OldroydB => "oldroyd_b",
            SolverKind::Both => "both",
        }
    }

    pub fn has_kinetic(&self) -> bool {
        matches!(self, SolverKind::Kinetic | SolverKind::Both)
    }

    pub fn has_oldroyd(&self) -> bool {
        matches!(self, SolverKind::OldroydB | SolverKind::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// Largest stable step, capped at `max`.
    Auto { max: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialVelocity {
    TaylorGreen,
    Zero,
    /// Random low modes drawn from the seed.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialDensity {
    Equilibrium,
    StretchedGaussian,
    ExponentialTail,
}

/// Validated simulation configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub nu1: f64,
    pub nu2: f64,
    pub epsilon: f64,
    pub k: f64,
    pub q: f64,
    pub nx: usize,
    pub nm: usize,
    pub l_m: f64,
    pub alpha: f64,
    pub dt: DtPolicy,
    pub t_final: f64,
    pub solver: SolverKind,
    pub closure: ClosureSpec,
    pub hierarchy_degree: usize,
    pub initial_u: InitialVelocity,
    pub u_amplitude: f64,
    pub initial_f: InitialDensity,
    pub f_c: f64,
    /// `None` samples every step.
    pub sample_interval: Option<f64>,
    pub snapshot_interval: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "nu1",
    "nu2",
    "epsilon",
    "K",
    "q",
    "nx",
    "nm",
    "L_m",
    "alpha",
    "dt",
    "dt_max",
    "T",
    "solver",
    "closure",
    "hierarchy_degree",
    "initial_u",
    "u_amplitude",
    "initial_f",
    "f_c",
    "sample_interval",
    "snapshot_interval",
    "output_dir",
    "seed",
];

struct Entries {
    values: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(String, usize)> {
        self.values.get(key)
    }

    fn line(&self, key: &str) -> String {
        match self.values.get(key) {
            Some((_, line)) => format!("line {line}"),
            None => "default".into(),
        }
    }

    fn parse<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.values.get(key) {
            Some((v, line)) => v
                .parse()
                .map_err(|_| Error::Config(format!("line {line}: key `{key}` has invalid value `{v}`"))),
            None => default.ok_or_else(|| Error::Config(format!("missing required key `{key}`"))),
        }
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v: f64 = self.parse(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("{}: key `{key}` must be positive, got {v}", self.line(key))));
        }
        Ok(v)
    }

    fn choice<T: Copy>(&self, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
        let Some((v, line)) = self.values.get(key) else {
            return Ok(default);
        };
        options.iter().find(|(name, _)| name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("line {line}: key `{key}` must be one of {}, got `{v}`", names.join(" | ")))
        })
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
        }
        if let Some((_, first)) = values.insert(key.to_string(), (value.to_string(), line)) {
            return Err(Error::Config(format!("line {line}: key `{key}` already set on line {first}")));
        }
    }
    Ok(Entries { values })
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let e = tokenize(text)?;
        let q = e.parse::<f64>("q", Some(1.0))?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::Config(format!("{}: key `q` must be at least 1, got {q}", e.line("q"))));
        }
        let l_m = e.positive("L_m", Some(8.0))?;
        let alpha = e.positive("alpha", Some(l_m / 2.0))?;
        if alpha > l_m / 2.0 {
            return Err(Error::Config(format!(
                "{}: key `alpha` = {alpha} exceeds `L_m`/2 = {} (`L_m` from {})",
                e.line("alpha"),
                l_m / 2.0,
                e.line("L_m")
            )));
        }
        let dt = match e.raw("dt").map(|(v, _)| v.as_str()) {
            None | Some("auto") => DtPolicy::Auto { max: e.positive("dt_max", Some(0.01))? },
            Some(_) => DtPolicy::Fixed(e.positive("dt", None)?),
        };
        let t_final: f64 = e.parse("T", None)?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("{}: key `T` must be nonnegative, got {t_final}", e.line("T"))));
        }
        let solver = e.choice(
            "solver",
            SolverKind::Kinetic,
            &[
                ("kinetic", SolverKind::Kinetic),
                ("hierarchy", SolverKind::Hierarchy),
                ("oldroyd_b", SolverKind::OldroydB),
                ("both", SolverKind::Both),
            ],
        )?;
        let default_closure = if q == 1.0 { ClosureKind::ExactHookean } else { ClosureKind::EquilibriumFactorization };
        let closure = ClosureSpec {
            kind: e.choice(
                "closure",
                default_closure,
                &[
                    ("exact_hookean", ClosureKind::ExactHookean),
                    ("zero_truncation", ClosureKind::ZeroTruncation),
                    ("equilibrium_factorization", ClosureKind::EquilibriumFactorization),
                ],
            )?,
        };
        if q != 1.0 && (solver.has_oldroyd() || closure.kind == ClosureKind::ExactHookean) {
            let key = if solver.has_oldroyd() { "solver" } else { "closure" };
            return Err(Error::Config(format!(
                "{}: exact closure requires q=1 (`q` = {q} from {})",
                e.line(key),
                e.line("q")
            )));
        }
        let min_degree = (2.0 * q).ceil() as usize;
        let hierarchy_degree: usize = e.parse("hierarchy_degree", Some(min_degree))?;
        if solver == SolverKind::Hierarchy {
            if q.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "{}: solver `hierarchy` needs integer `q`, got {q}",
                    e.line("solver")
                )));
            }
            if hierarchy_degree < min_degree {
                return Err(Error::Config(format!(
                    "{}: key `hierarchy_degree` must be at least 2q = {min_degree}",
                    e.line("hierarchy_degree")
                )));
            }
        }
        let nx: usize = e.parse("nx", Some(32))?;
        let nm: usize = e.parse("nm", Some(64))?;
        for (key, n) in [("nx", nx), ("nm", nm)] {
            if n < 4 || n % 2 == 1 {
                return Err(Error::Config(format!("{}: key `{key}` must be even and at least 4", e.line(key))));
            }
        }
        let optional_interval = |key: &str| -> Result<Option<f64>> {
            match e.raw(key).map(|(v, _)| v.as_str()) {
                None | Some("none") => Ok(None),
                Some(_) => Ok(Some(e.positive(key, None)?)),
            }
        };
        Ok(Self {
            nu1: e.positive("nu1", Some(1.0))?,
            nu2: e.positive("nu2", Some(1.0))?,
            epsilon: e.positive("epsilon", Some(1.0))?,
            k: e.positive("K", Some(1.0))?,
            q,
            nx,
            nm,
            l_m,
            alpha,
            dt,
            t_final,
            solver,
            closure,
            hierarchy_degree,
            initial_u: e.choice(
                "initial_u",
                InitialVelocity::TaylorGreen,
                &[
                    ("taylor_green", InitialVelocity::TaylorGreen),
                    ("zero", InitialVelocity::Zero),
                    ("random", InitialVelocity::Random),
                ],
            )?,
            u_amplitude: e.parse("u_amplitude", Some(0.5))?,
            initial_f: e.choice(
                "initial_f",
                InitialDensity::Equilibrium,
                &[
                    ("equilibrium", InitialDensity::Equilibrium),
                    ("stretched_gaussian", InitialDensity::StretchedGaussian),
                    ("exponential_tail", InitialDensity::ExponentialTail),
                ],
            )?,
            f_c: e.positive("f_c", Some(2.0))?,
            sample_interval: optional_interval("sample_interval")?,
            snapshot_interval: optional_interval("snapshot_interval")?,
            output_dir: e.raw("output_dir").map(|(v, _)| PathBuf::from(v)),
            seed: e.parse("seed", Some(0))?,
        })
    }

    /// Normalized `key = value` rendering; every field is written, so two
    /// files differing only in comments or defaults render identically.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("nu1", format!("{:?}", self.nu1));
        put("nu2", format!("{:?}", self.nu2));
        put("epsilon", format!("{:?}", self.epsilon));
        put("K", format!("{:?}", self.k));
        put("q", format!("{:?}", self.q));
        put("nx", self.nx.to_string());
        put("nm", self.nm.to_string());
        put("L_m", format!("{:?}", self.l_m));
        put("alpha", format!("{:?}", self.alpha));
        match self.dt {
            DtPolicy::Fixed(dt) => put("dt", format!("{dt:?}")),
            DtPolicy::Auto { max } => {
                put("dt", "auto".into());
                put("dt_max", format!("{max:?}"));
            }
        }
        put("T", format!("{:?}", self.t_final));
        put("solver", self.solver.label().into());
        put("closure", self.closure.name().into());
        put("hierarchy_degree", self.hierarchy_degree.to_string());
        put(
            "initial_u",
            match self.initial_u {
                InitialVelocity::TaylorGreen => "taylor_green",
                InitialVelocity::Zero => "zero",
                InitialVelocity::Random => "random",
            }
            .into(),
        );
        put("u_amplitude", format!("{:?}", self.u_amplitude));
        put(
            "initial_f",
            match self.initial_f {
                InitialDensity::Equilibrium => "equilibrium",
                InitialDensity::StretchedGaussian => "stretched_gaussian",
                InitialDensity::ExponentialTail => "exponential_tail",
            }
            .into(),
        );
        put("f_c", format!("{:?}", self.f_c));
        let interval = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:?}"));
        put("sample_interval", interval(self.sample_interval));
        put("snapshot_interval", interval(self.snapshot_interval));
        if let Some(dir) = &self.output_dir {
            put("output_dir", dir.display().to_string());
        }
        put("seed", self.seed.to_string());
        s
    }

    /// SHA-256 of the physics-relevant canonical form (output location excluded).
    pub fn hash(&self) -> [u8; 32] {
        let mut c = self.clone();
        c.output_dir = None;
        Sha256::digest(c.canonical().as_bytes()).into()
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    SimConfig::parse(&text)
}
