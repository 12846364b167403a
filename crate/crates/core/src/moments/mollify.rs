use statrs::function::factorial::binomial;
use statrs::function::gamma::gamma;

use super::{DiscreteMeasure, MomentTable};

fn double_factorial_odd(p: usize) -> f64 {
    // (p - 1)!! for even p
    (1..p).step_by(2).map(|k| k as f64).product()
}

/// `M_{p,q}` of the isotropic Gaussian with standard deviation `delta` per
/// coordinate.
pub fn gaussian_moment(p: usize, q: usize, delta: f64) -> f64 {
    if p % 2 == 1 || q % 2 == 1 {
        return 0.0;
    }
    delta.powi((p + q) as i32) * double_factorial_odd(p) * double_factorial_odd(q)
}

/// `∫ |z|^k g_δ(z) dz = (√2 δ)^k Γ(1 + k/2)`.
pub fn gaussian_radial_moment(k: usize, delta: f64) -> f64 {
    (std::f64::consts::SQRT_2 * delta).powi(k as i32) * gamma(1.0 + k as f64 / 2.0)
}

/// Moments of `g_δ *_m μ` up to `degree`, through the binomial transfer
/// formula. The radial entries are the upper bound
/// `Σ_p C(k,p) M̄_p[g_δ] M̄_{k-p}[|μ|]`.
pub fn mollify(mu: &DiscreteMeasure, delta: f64, degree: usize) -> MomentTable {
    assert!(delta > 0.0, "mollification width must be positive");
    let base = MomentTable::from_measure(mu, degree);
    let table = MomentTable::from_fn(degree, |a, b| {
        let mut sum = 0.0;
        for p in (0..=a).step_by(2) {
            for q in (0..=b).step_by(2) {
                sum += binomial(a as u64, p as u64)
                    * binomial(b as u64, q as u64)
                    * gaussian_moment(p, q, delta)
                    * base.at(a - p, b - q);
            }
        }
        sum
    });
    let base_radial = base.radial().expect("measure tables carry radial moments");
    let radial = (0..=degree)
        .map(|k| {
            (0..=k)
                .map(|p| {
                    binomial(k as u64, p as u64) * gaussian_radial_moment(p, delta) * base_radial[k - p]
                })
                .sum()
        })
        .collect();
    table.with_radial(radial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(2, 0, 0.5), 0.25);
        assert_eq!(gaussian_moment(1, 0, 0.5), 0.0);
        assert!((gaussian_moment(4, 2, 1.0) - 3.0).abs() < 1e-15);
        assert!((gaussian_radial_moment(2, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn low_order_identities() {
        let mu = DiscreteMeasure::new(vec![[1.0, -2.0], [0.5, 0.25]], vec![0.3, 1.1]).unwrap();
        let d = 0.4;
        let t = mollify(&mu, d, 4);
        let m00 = moment(&mu, 0, 0);
        assert!((t.get(0, 0).unwrap() - m00).abs() < 1e-15);
        assert!((t.get(1, 0).unwrap() - moment(&mu, 1, 0)).abs() < 1e-15);
        let expect = moment(&mu, 2, 0) + d * d * m00;
        assert!((t.get(2, 0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_cross_check() {
        // sample y ~ μ, z ~ g_δ and average (y+z)_1^2
        let mu = DiscreteMeasure::new(vec![[1.0, 0.0], [-0.5, 2.0]], vec![0.25, 0.75]).unwrap();
        let d = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let y = if rng.gen::<f64>() < 0.25 { [1.0, 0.0] } else { [-0.5, 2.0] };
            // Box-Muller
            let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos() * d;
            acc += (y[0] + z).powi(2);
        }
        let mc = acc / n as f64;
        let exact = mollify(&mu, d, 2).get(2, 0).unwrap();
        assert!((mc - exact).abs() < 0.01, "mc {mc} exact {exact}");
    }

    #[test]
    fn radial_bound_dominates() {
        let mu = DiscreteMeasure::new(vec![[1.0, 1.0], [-2.0, 0.5]], vec![0.5, 0.5]).unwrap();
        let t = mollify(&mu, 0.5, 8);
        // gamma(1) from the Lanczos approximation is off by an ulp
        assert!(t.radial_bound_violation().unwrap() <= 1e-14, "{:?}", t.radial_bound_violation());
    }

    #[test]
    fn converges_as_width_shrinks() {
        let mu = DiscreteMeasure::new(vec![[0.7, -1.2], [1.5, 0.3]], vec![0.6, 0.4]).unwrap();
        let exact = MomentTable::from_measure(&mu, 6);
        let mut prev = f64::INFINITY;
        for &d in &[1.0, 0.5, 0.25, 0.125] {
            let t = mollify(&mu, d, 6);
            let err = t
                .entries()
                .map(|(a, b, v)| (v - exact.at(a, b)).abs())
                .fold(0.0, f64::max);
            // O(δ²) in fact, so the O(δ) envelope holds with room
            assert!(err <= 200.0 * d, "delta {d}: err {err}");
            assert!(err < prev);
            prev = err;
        }
    }
}
