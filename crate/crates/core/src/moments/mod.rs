//! Moments of configuration-space measures and the diagnostics built on
//! them: Kramer stress, exponential moment norms, Riesz-functional
//! positivity, Carleman partial sums and Gaussian mollification.

mod carleman;
mod mollify;
mod norms;
mod riesz;
mod stress;

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mgrid::MGrid;

pub use carleman::{carleman_partial_sums, CarlemanReport, CARLEMAN_CAVEAT};
pub use mollify::{gaussian_moment, gaussian_radial_moment, mollify};
pub use norms::{x_r_norm, XrNorm, XrVariant};
pub use riesz::{psd_check, riesz_square, Polynomial, PsdOutcome};
pub use stress::{kramer_stress, kramer_stress_with_prefactor, StressField};

/// Finite combination of point masses in configuration space.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Nonnegative measure; rejects negative or non-finite weights.
    pub fn new(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("weights of a nonnegative measure must be finite and >= 0".into()));
        }
        Self::signed(points, weights)
    }

    /// Signed measure; negative weights are allowed.
    pub fn signed(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Domain(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        Ok(Self { points, weights })
    }

    pub fn point_mass(m: [f64; 2]) -> Self {
        Self { points: vec![m], weights: vec![1.0] }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_signed(&self) -> bool {
        self.weights.iter().any(|w| *w < 0.0)
    }

    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

impl DiscreteMeasure {
    /// Quadrature measure for a radial density `profile(r)`: composite
    /// Simpson in `r` on `[0, r_max]` with `n_r` (even) intervals, times
    /// `n_theta` equally spaced angles. Moments of degree below `n_theta`
    /// are exact up to the radial quadrature error.
    pub fn polar_quadrature(profile: impl Fn(f64) -> f64, r_max: f64, n_r: usize, n_theta: usize) -> Self {
        assert!(n_r % 2 == 0 && n_r > 0, "Simpson needs an even interval count");
        let h = r_max / n_r as f64;
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut points = Vec::with_capacity((n_r + 1) * n_theta);
        let mut weights = Vec::with_capacity((n_r + 1) * n_theta);
        for i in 1..=n_r {
            let r = i as f64 * h;
            let simpson = if i == n_r { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let w = simpson * h / 3.0 * r * profile(r) * dtheta;
            for j in 0..n_theta {
                let th = j as f64 * dtheta;
                points.push([r * th.cos(), r * th.sin()]);
                weights.push(w);
            }
        }
        Self { points, weights }
    }
}

/// `Σ_{a+b=2p} M_{a,b}[μ1] M_{a,b}[μ2]`, nonnegative for nonnegative
/// measures: it is the double integral of the complete homogeneous
/// polynomial `h_{2p}(m1 n1, m2 n2)`, which is positive definite.
pub fn restoring_pairing(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, p: usize) -> f64 {
    (0..=2 * p).map(|b| moment(mu1, 2 * p - b, b) * moment(mu2, 2 * p - b, b)).sum()
}

/// `∫ m1^a m2^b dμ` by exact summation.
pub fn moment(mu: &DiscreteMeasure, a: usize, b: usize) -> f64 {
    mu.points
        .iter()
        .zip(&mu.weights)
        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
        .sum()
}

/// `∫ |m|^k d|μ|`.
pub fn radial_moment(mu: &DiscreteMeasure, k: usize) -> f64 {
    mu.points
        .iter()
        .zip(&mu.weights)
        .map(|(p, w)| w.abs() * p[0].hypot(p[1]).powi(k as i32))
        .sum()
}

/// `∫ m1^a m2^b f dm` for a cell-centred density slice, midpoint rule.
pub fn density_moment(slice: &[f64], mgrid: &MGrid, a: usize, b: usize) -> f64 {
    let (a, b) = (a as i32, b as i32);
    let sum: f64 = slice
        .iter()
        .enumerate()
        .map(|(c, f)| {
            let (m1, m2) = mgrid.point(c);
            f * m1.powi(a) * m2.powi(b)
        })
        .sum();
    sum * mgrid.cell_area()
}

/// All moments `M_{a,b}` with `a + b ≤ N`, plus optional radial absolute
/// moments `M̄_k`, `k ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    degree: usize,
    values: Vec<f64>,
    radial: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct MomentRow {
    a: usize,
    b: usize,
    value: f64,
}

fn triangle_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

impl MomentTable {
    pub fn zeros(degree: usize) -> Self {
        Self { degree, values: vec![0.0; triangle_index(0, degree) + 1], radial: None }
    }

    pub fn from_fn(degree: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut table = Self::zeros(degree);
        for d in 0..=degree {
            for b in 0..=d {
                table.values[triangle_index(d - b, b)] = f(d - b, b);
            }
        }
        table
    }

    pub fn from_measure(mu: &DiscreteMeasure, degree: usize) -> Self {
        let mut table = Self::from_fn(degree, |a, b| moment(mu, a, b));
        table.radial = Some((0..=degree).map(|k| radial_moment(mu, k)).collect());
        table
    }

    /// Moments of a nonnegative cell-centred density.
    pub fn from_density(slice: &[f64], mgrid: &MGrid, degree: usize) -> Self {
        let mut table = Self::zeros(degree);
        let mut radial = vec![0.0; degree + 1];
        let mut p1 = vec![1.0; degree + 1];
        let mut p2 = vec![1.0; degree + 1];
        for (c, &f) in slice.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            let (m1, m2) = mgrid.point(c);
            for k in 1..=degree {
                p1[k] = p1[k - 1] * m1;
                p2[k] = p2[k - 1] * m2;
            }
            for d in 0..=degree {
                for b in 0..=d {
                    table.values[triangle_index(d - b, b)] += f * p1[d - b] * p2[b];
                }
            }
            let r = m1.hypot(m2);
            let mut rk = f.abs();
            for entry in radial.iter_mut() {
                *entry += rk;
                rk *= r;
            }
        }
        let w = mgrid.cell_area();
        table.values.iter_mut().for_each(|v| *v *= w);
        radial.iter_mut().for_each(|v| *v *= w);
        table.radial = Some(radial);
        table
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, a: usize, b: usize) -> Result<f64> {
        if a + b > self.degree {
            return Err(Error::Capacity { requested: a + b, capacity: self.degree });
        }
        Ok(self.values[triangle_index(a, b)])
    }

    /// Unchecked access for callers that already validated the degree.
    pub(crate) fn at(&self, a: usize, b: usize) -> f64 {
        self.values[triangle_index(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, value: f64) -> Result<()> {
        if a + b > self.degree {
            return Err(Error::Capacity { requested: a + b, capacity: self.degree });
        }
        self.values[triangle_index(a, b)] = value;
        Ok(())
    }

    pub fn radial(&self) -> Option<&[f64]> {
        self.radial.as_deref()
    }

    pub fn with_radial(mut self, radial: Vec<f64>) -> Self {
        assert_eq!(radial.len(), self.degree + 1);
        self.radial = Some(radial);
        self
    }

    /// Iterates `(a, b, M_{a,b})` by increasing total degree.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| (0..=d).map(move |b| (d - b, b, self.at(d - b, b))))
    }

    /// Largest violation of `|M_{a,b}| ≤ M̄_{a+b}`; `None` without radial data.
    pub fn radial_bound_violation(&self) -> Option<f64> {
        let radial = self.radial.as_ref()?;
        Some(
            self.entries()
                .map(|(a, b, v)| v.abs() - radial[a + b])
                .fold(f64::NEG_INFINITY, f64::max),
        )
    }

    /// Writes `a,b,value` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (a, b, value) in self.entries() {
            w.serialize(MomentRow { a, b, value })?;
        }
        w.flush()?;
        Ok(())
    }
}
