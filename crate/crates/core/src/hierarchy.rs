//! Macroscopic solvers: the moment hierarchy of the kinetic equation and
//! its exact Hookean closure, the diffusive Oldroyd-B system.
//!
//! Convention: `(∇u)_ij = ∂_j u_i`, so the stretching drift is
//! `((∇u) m)_i = ∂_j u_i m_j` and the Oldroyd-B production term reads
//! `(∇u) σ + σ (∇u)ᵀ`.

use std::sync::Arc;

use statrs::function::factorial::binomial;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fokker_planck::{KineticDensity, PotentialSpec};
use crate::grid::{partial, Grid, SpectralField2D, VectorField2D};
use crate::integrate::{check_cfl, if_rk2, transport};
use crate::moments::StressField;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    /// No closure needed: valid only for `q = 1`, where the degree never grows.
    ExactHookean,
    /// Moments above the truncation degree are set to zero.
    ZeroTruncation,
    /// `M_{a,b} ≈ M_{0,0} · M_{a,b}[e^{-U}/Z]` above the truncation degree.
    EquilibriumFactorization,
}

/// How moments above the stored degree are replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureSpec {
    pub kind: ClosureKind,
}

impl ClosureSpec {
    pub fn exact_hookean() -> Self {
        Self { kind: ClosureKind::ExactHookean }
    }

    pub fn zero_truncation() -> Self {
        Self { kind: ClosureKind::ZeroTruncation }
    }

    pub fn equilibrium_factorization() -> Self {
        Self { kind: ClosureKind::EquilibriumFactorization }
    }

    /// Configuration name.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ClosureKind::ExactHookean => "exact_hookean",
            ClosureKind::ZeroTruncation => "zero_truncation",
            ClosureKind::EquilibriumFactorization => "equilibrium_factorization",
        }
    }

    /// Reports built on anything but the exact closure carry this label.
    pub fn label(&self) -> &'static str {
        match self.kind {
            ClosureKind::ExactHookean => "exact",
            _ => "uncontrolled approximation",
        }
    }
}

/// `M_{a,b}` of `e^{-|m|^{2q}} / Z`.
pub fn equilibrium_moment(q: usize, a: usize, b: usize) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    let q = q as f64;
    let n = (a + b) as f64;
    let radial = gamma((n + 2.0) / (2.0 * q)) / (2.0 * q);
    let angular = 2.0 * gamma((a as f64 + 1.0) / 2.0) * gamma((b as f64 + 1.0) / 2.0) / gamma((n + 2.0) / 2.0);
    let z = std::f64::consts::PI * gamma(1.0 / q) / q;
    radial * angular / z
}

fn tri(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Moment fields `M_{a,b}(x)` for `a + b ≤ N`.
#[derive(Clone, Debug)]
pub struct MomentFieldSet {
    degree: usize,
    q: usize,
    closure: ClosureSpec,
    fields: Vec<SpectralField2D>,
}

impl MomentFieldSet {
    pub fn new(degree: usize, q: usize, closure: ClosureSpec, fields: Vec<SpectralField2D>) -> Result<Self> {
        if q == 0 {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if closure.kind == ClosureKind::ExactHookean && q != 1 {
            return Err(Error::Config("exact closure requires q=1".into()));
        }
        let expected = (degree + 1) * (degree + 2) / 2;
        if fields.len() != expected {
            return Err(Error::Config(format!(
                "degree {degree} needs {expected} moment fields, got {}",
                fields.len()
            )));
        }
        Ok(Self { degree, q, closure, fields })
    }

    /// Moments of a kinetic density. Non-integer `q` is unsupported here.
    pub fn from_density(f: &KineticDensity, degree: usize, pot: &PotentialSpec, closure: ClosureSpec) -> Result<Self> {
        let q = pot
            .integer_q()
            .ok_or_else(|| Error::Unsupported(format!("hierarchy needs integer q, got {}", pot.q())))?;
        let fields = (0..=degree)
            .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
            .map(|(a, b)| f.moment_field(a, b))
            .collect();
        Self::new(degree, q, closure, fields)
    }

    /// `M_{0,0} = ρ`, every other entry `ρ` times the equilibrium moment.
    pub fn equilibrium(rho: &SpectralField2D, degree: usize, q: usize, closure: ClosureSpec) -> Result<Self> {
        let fields = (0..=degree)
            .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
            .map(|(a, b)| rho.scale(equilibrium_moment(q, a, b)))
            .collect();
        Self::new(degree, q, closure, fields)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn closure(&self) -> ClosureSpec {
        self.closure
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    pub fn fields(&self) -> &[SpectralField2D] {
        &self.fields
    }

    pub fn get(&self, a: usize, b: usize) -> Result<&SpectralField2D> {
        if a + b > self.degree {
            return Err(Error::Capacity { requested: a + b, capacity: self.degree });
        }
        Ok(&self.fields[tri(a, b)])
    }

    fn with_fields(&self, fields: Vec<SpectralField2D>) -> Self {
        Self { fields, ..self.clone() }
    }
}

/// Moment of any degree, closed above the stored one.
fn closed_moment(fields: &[SpectralField2D], degree: usize, q: usize, closure: ClosureSpec, a: usize, b: usize) -> SpectralField2D {
    if a + b <= degree {
        return fields[tri(a, b)].clone();
    }
    match closure.kind {
        ClosureKind::EquilibriumFactorization => fields[0].scale(equilibrium_moment(q, a, b)),
        // exact_hookean never reaches here: for q = 1 the degree does not grow
        ClosureKind::ZeroTruncation | ClosureKind::ExactHookean => SpectralField2D::zeros(fields[0].grid()),
    }
}

/// Velocity gradient `[∂1u1, ∂2u1, ∂1u2, ∂2u2]`.
fn velocity_gradient(u: &VectorField2D) -> [SpectralField2D; 4] {
    [partial(&u.u1, 0), partial(&u.u1, 1), partial(&u.u2, 0), partial(&u.u2, 1)]
}

fn hierarchy_terms(
    fields: &[SpectralField2D],
    degree: usize,
    q: usize,
    closure: ClosureSpec,
    u: &VectorField2D,
    epsilon: f64,
) -> Vec<SpectralField2D> {
    let grid = fields[0].grid();
    let [a11, a12, a21, a22] = velocity_gradient(u);
    let m = |a: usize, b: usize| closed_moment(fields, degree, q, closure, a, b);
    let mut out = Vec::with_capacity(fields.len());
    for d in 0..=degree {
        for b in 0..=d {
            let a = d - b;
            let (af, bf) = (a as f64, b as f64);
            let mut acc = transport(&fields[tri(a, b)], u);
            if d > 0 {
                // restoring force: -2qε(a+b) M_{a,b}[|m|^{2(q-1)}]
                let mut weighted = SpectralField2D::zeros(grid);
                for j in 0..q {
                    let c = binomial((q - 1) as u64, j as u64);
                    weighted = weighted.add(&m(a + 2 * j, b + 2 * (q - 1 - j)).scale(c));
                }
                acc = acc.add(&weighted.scale(-2.0 * q as f64 * epsilon * d as f64));
            }
            if a >= 2 {
                acc = acc.add(&m(a - 2, b).scale(epsilon * af * (af - 1.0)));
            }
            if b >= 2 {
                acc = acc.add(&m(a, b - 2).scale(epsilon * bf * (bf - 1.0)));
            }
            let mab = &fields[tri(a, b)];
            if a >= 1 {
                acc = acc.add(&a11.product(mab).scale(af));
                acc = acc.add(&a12.product(&m(a - 1, b + 1)).scale(af));
            }
            if b >= 1 {
                acc = acc.add(&a21.product(&m(a + 1, b - 1)).scale(bf));
                acc = acc.add(&a22.product(mab).scale(bf));
            }
            out.push(acc);
        }
    }
    out
}

/// Time derivative of every stored moment except the `ν₂Δ` part (handled by
/// the integrating factor): transport `-∇·(u M_{a,b})`, restoring drift,
/// configuration diffusion and stretching.
pub fn hierarchy_rhs(m: &MomentFieldSet, u: &VectorField2D, epsilon: f64) -> Vec<SpectralField2D> {
    hierarchy_terms(&m.fields, m.degree, m.q, m.closure, u, epsilon)
}

/// One integrating-factor RK2 step of the hierarchy with `u` frozen.
pub fn hierarchy_step(m: &MomentFieldSet, u: &VectorField2D, epsilon: f64, nu2: f64, dt: f64) -> Result<MomentFieldSet> {
    check_cfl(m.grid(), u, dt)?;
    let (degree, q, closure) = (m.degree, m.q, m.closure);
    let fields = if_rk2(&m.fields, nu2, dt, |y| Ok(hierarchy_terms(y, degree, q, closure, u, epsilon)))?;
    Ok(m.with_fields(fields))
}

/// `σ = 2q ∫ |m|^{2(q-1)} m⊗m f dm` written through moments of degree `2q`.
pub fn stress_from_moments(m: &MomentFieldSet) -> Result<StressField> {
    let q = m.q;
    if m.degree < 2 * q {
        return Err(Error::Capacity { requested: 2 * q, capacity: m.degree });
    }
    let grid = m.grid();
    let component = |e1: usize, e2: usize| {
        let mut acc = SpectralField2D::zeros(grid);
        for j in 0..q {
            let c = binomial((q - 1) as u64, j as u64);
            acc = acc.add(&m.fields[tri(e1 + 2 * j, e2 + 2 * (q - 1 - j))].scale(c));
        }
        acc.scale(2.0 * q as f64)
    };
    Ok(StressField::new(component(2, 0), component(1, 1), component(0, 2)))
}

/// Diffusive Oldroyd-B state `(σ, ρ)`.
#[derive(Clone, Debug)]
pub struct OldroydState {
    pub stress: StressField,
    pub rho: SpectralField2D,
}

impl OldroydState {
    pub fn new(stress: StressField, rho: SpectralField2D) -> Self {
        Self { stress, rho }
    }

    /// `σ` from Kramer's expression and `ρ = M_{0,0}`; requires `q = 1`.
    pub fn from_density(f: &KineticDensity) -> Result<Self> {
        Ok(Self { stress: crate::moments::kramer_stress(f, 1.0)?, rho: f.density_field() })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.rho.grid()
    }

    fn fields(&self) -> Vec<SpectralField2D> {
        vec![self.stress.s11.clone(), self.stress.s12.clone(), self.stress.s22.clone(), self.rho.clone()]
    }

    fn from_fields(mut v: Vec<SpectralField2D>) -> Self {
        let rho = v.pop().expect("four fields");
        let s22 = v.pop().expect("four fields");
        let s12 = v.pop().expect("four fields");
        let s11 = v.pop().expect("four fields");
        Self { stress: StressField::new(s11, s12, s22), rho }
    }
}

fn oldroyd_terms(y: &[SpectralField2D], u: &VectorField2D, epsilon: f64) -> Vec<SpectralField2D> {
    let [a11, a12, a21, a22] = velocity_gradient(u);
    let (s11, s12, s22, rho) = (&y[0], &y[1], &y[2], &y[3]);
    let relax = 4.0 * epsilon;
    // (∇u)σ + σ(∇u)ᵀ
    let p11 = a11.product(s11).add(&a12.product(s12)).scale(2.0);
    let p12 = a11.product(s12).add(&a12.product(s22)).add(&a21.product(s11)).add(&a22.product(s12));
    let p22 = a21.product(s12).add(&a22.product(s22)).scale(2.0);
    vec![
        transport(s11, u).add(&p11).add(&s11.sub(rho).scale(-relax)),
        transport(s12, u).add(&p12).add(&s12.scale(-relax)),
        transport(s22, u).add(&p22).add(&s22.sub(rho).scale(-relax)),
        transport(rho, u),
    ]
}

/// Right side `[σ11, σ12, σ22, ρ]` of the diffusive Oldroyd-B system without
/// the `ν₂Δ` part: `-∇·(uσ) + (∇u)σ + σ(∇u)ᵀ - 4ε(σ - ρ𝕀)` and `-∇·(uρ)`.
pub fn oldroyd_rhs(s: &OldroydState, u: &VectorField2D, epsilon: f64) -> Vec<SpectralField2D> {
    oldroyd_terms(&s.fields(), u, epsilon)
}

pub fn oldroyd_b_step(s: &OldroydState, u: &VectorField2D, epsilon: f64, nu2: f64, dt: f64) -> Result<OldroydState> {
    check_cfl(s.grid(), u, dt)?;
    let fields = if_rk2(&s.fields(), nu2, dt, |y| Ok(oldroyd_terms(y, u, epsilon)))?;
    Ok(OldroydState::from_fields(fields))
}

/// Stress mismatch between the kinetic and a macroscopic route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureReport {
    /// `‖σ_kin − σ_mac‖_{L²} / ‖σ_kin‖_{L²}`.
    pub l2_diff: f64,
    /// Largest pointwise entry difference.
    pub linf_diff: f64,
}

pub fn closure_consistency_check(f: &KineticDensity, macroscopic: &StressField) -> Result<ClosureReport> {
    let (a, b) = (f.grid(), macroscopic.grid());
    if (a.nx(), a.ny()) != (b.nx(), b.ny()) {
        return Err(Error::Config("kinetic and macroscopic states live on different grids".into()));
    }
    let kinetic = crate::moments::kramer_stress(f, 1.0)?;
    Ok(ClosureReport {
        l2_diff: macroscopic.relative_difference(&kinetic),
        linf_diff: macroscopic.max_abs_difference(&kinetic),
    })
}
