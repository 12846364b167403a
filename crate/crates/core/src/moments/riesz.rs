use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MomentTable;

/// Polynomial in two variables: `(exponents (i, j), coefficient)` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<((usize, usize), f64)>,
}

impl Polynomial {
    pub fn monomial(i: usize, j: usize) -> Self {
        Self { terms: vec![((i, j), 1.0)] }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|((i, j), _)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.terms.iter().map(|((i, j), c)| c * x1.powi(*i as i32) * x2.powi(*j as i32)).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdOutcome {
    Pass,
    Fail { witness: Polynomial, value: f64 },
}

impl PsdOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, PsdOutcome::Pass)
    }
}

/// Riesz functional `L_m(h²)` and the absolute scale used to judge its sign.
pub fn riesz_square(m: &MomentTable, h: &Polynomial) -> (f64, f64) {
    let mut value = 0.0;
    let mut scale = 0.0;
    for &((i1, j1), c1) in &h.terms {
        for &((i2, j2), c2) in &h.terms {
            let v = m.at(i1 + i2, j1 + j2);
            value += c1 * c2 * v;
            scale += (c1 * c2 * v).abs();
        }
    }
    (value, scale)
}

/// Randomized check of `L_m(h²) ≥ 0`. The monomials `x1^k`, `x2^k`,
/// `k ≤ max_poly_degree`, are always tried first, then `trials` polynomials
/// with uniform coefficients in `[-1, 1]` drawn from `seed`.
pub fn psd_check(m: &MomentTable, trials: usize, max_poly_degree: usize, seed: u64) -> PsdOutcome {
    assert!(
        m.degree() >= 2 * max_poly_degree,
        "psd_check needs moments up to degree {}",
        2 * max_poly_degree
    );
    let negative = |h: &Polynomial| {
        let (value, scale) = riesz_square(m, h);
        (value < -1e-12 * scale.max(f64::MIN_POSITIVE)).then_some(value)
    };
    for k in 0..=max_poly_degree {
        for h in [Polynomial::monomial(k, 0), Polynomial::monomial(0, k)] {
            if let Some(value) = negative(&h) {
                return PsdOutcome::Fail { witness: h, value };
            }
        }
    }
    let exponents: Vec<(usize, usize)> = (0..=max_poly_degree)
        .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let h = Polynomial {
            terms: exponents.iter().map(|&e| (e, rng.gen_range(-1.0..=1.0))).collect(),
        };
        if let Some(value) = negative(&h) {
            return PsdOutcome::Fail { witness: h, value };
        }
    }
    PsdOutcome::Pass
}
