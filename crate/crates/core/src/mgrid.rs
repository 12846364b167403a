//! Cell-centred configuration-space grid on the box `[-L, L]²`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MGrid {
    n: usize,
    half_width: f64,
    h: f64,
    centers: Vec<f64>,
}

impl MGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || !(half_width > 0.0) {
            return Err(Error::Config(format!(
                "m-grid needs n >= 2 and L_m > 0, got n={n}, L_m={half_width}"
            )));
        }
        let h = 2.0 * half_width / n as f64;
        let centers = (0..n).map(|i| -half_width + (i as f64 + 0.5) * h).collect();
        Ok(Self { n, half_width, h, centers })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Quadrature weight of one cell.
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Centre of flat cell index `c = i1 * n + i2`.
    pub fn point(&self, c: usize) -> (f64, f64) {
        (self.centers[c / self.n], self.centers[c % self.n])
    }

    /// Evaluates `f` at every cell centre.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|c| {
                let (m1, m2) = self.point(c);
                f(m1, m2)
            })
            .collect()
    }

    /// Midpoint-rule integral of a cell-centred slice.
    pub fn integrate(&self, slice: &[f64]) -> f64 {
        slice.iter().sum::<f64>() * self.cell_area()
    }
}
