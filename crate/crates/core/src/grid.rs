//! Periodic spatial grid on the torus `[0, 2π)²` with spectral differential
//! operators.
//!
//! Samples are stored row-major with the first coordinate `x1` as the slow
//! index: `values[i * ny + j]` is the sample at `(2πi/nx, 2πj/ny)`.
//! Fourier coefficients are normalized so that
//! `values[p] = Σ_k coeffs[k] e^{i k·x_p}`; with this convention Parseval
//! reads `mean(values²) = Σ |coeffs|²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// FFT plans and wavenumber tables for one grid size.
pub struct Grid {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    // Integer wavenumbers, Nyquist stored as -n/2.
    kx: Vec<f64>,
    ky: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

fn wavenumbers(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i < n / 2 { i as f64 } else { i as f64 - n as f64 })
        .collect()
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Arc<Self>> {
        if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 2 || ny < 2 {
            return Err(Error::Config(format!(
                "grid sizes must be powers of two >= 2, got {nx}x{ny}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            kx: wavenumbers(nx),
            ky: wavenumbers(ny),
        }))
    }

    /// Square grid.
    pub fn square(n: usize) -> Result<Arc<Self>> {
        Self::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx1(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn dx2(&self) -> f64 {
        2.0 * PI / self.ny as f64
    }

    /// Area of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dx1() * self.dx2()
    }

    pub fn coords(&self, p: usize) -> (f64, f64) {
        let (i, j) = (p / self.ny, p % self.ny);
        (i as f64 * self.dx1(), j as f64 * self.dx2())
    }

    /// Wavenumber pair of coefficient index `p` (Nyquist reported as `-n/2`).
    pub fn wavenumber(&self, p: usize) -> (f64, f64) {
        (self.kx[p / self.ny], self.ky[p % self.ny])
    }

    /// Wavenumbers used for odd-order derivatives: the Nyquist mode is
    /// dropped so derivatives of real fields stay real.
    pub fn derivative_wavenumber(&self, p: usize) -> (f64, f64) {
        let (i, j) = (p / self.ny, p % self.ny);
        let k1 = if self.nx > 1 && i == self.nx / 2 { 0.0 } else { self.kx[i] };
        let k2 = if self.ny > 1 && j == self.ny / 2 { 0.0 } else { self.ky[j] };
        (k1, k2)
    }

    pub fn k_squared(&self, p: usize) -> f64 {
        let (k1, k2) = self.wavenumber(p);
        k1 * k1 + k2 * k2
    }

    /// True when the mode survives the 2/3-rule truncation.
    pub fn in_band(&self, p: usize) -> bool {
        let (k1, k2) = self.wavenumber(p);
        k1.abs() <= self.nx as f64 / 3.0 && k2.abs() <= self.ny as f64 / 3.0
    }

    /// Forward transform of real samples, normalized by `1/(nx ny)`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut data);
        data
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.inverse_in_place(&mut data);
        data.iter().map(|c| c.re).collect()
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        debug_assert_eq!(data.len(), self.len());
        let (row, col) = if forward {
            (&self.fwd_y, &self.fwd_x)
        } else {
            (&self.inv_y, &self.inv_x)
        };
        // rows are contiguous in x2
        row.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); self.nx];
        for j in 0..self.ny {
            for i in 0..self.nx {
                column[i] = data[i * self.ny + j];
            }
            col.process(&mut column);
            for i in 0..self.nx {
                data[i * self.ny + j] = column[i];
            }
        }
    }
}

/// Real scalar field on the periodic grid with lazily computed Fourier
/// coefficients.
#[derive(Clone)]
pub struct SpectralField2D {
    grid: Arc<Grid>,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for SpectralField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField2D")
            .field("nx", &self.grid.nx)
            .field("ny", &self.grid.ny)
            .finish()
    }
}

impl SpectralField2D {
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        Self { grid: Arc::clone(grid), values, coeffs: OnceLock::new() }
    }

    /// Builds a field from coefficients; the imaginary residue of the inverse
    /// transform is discarded.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count does not match grid");
        let values = grid.inverse(&coeffs);
        // coefficients are recomputed from the real samples on demand so the
        // cache is always conjugate symmetric
        Self { grid: Arc::clone(grid), values, coeffs: OnceLock::new() }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|p| {
                let (x1, x2) = grid.coords(p);
                f(x1, x2)
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| self.grid.forward(&self.values))
    }

    /// Builds a new field by transforming the coefficients mode by mode.
    pub fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs: Vec<Complex64> =
            self.coeffs().iter().enumerate().map(|(p, &c)| f(p, c)).collect();
        Self::from_coeffs(&self.grid, coeffs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_values(&self.grid, values)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Pointwise product followed by 2/3-rule dealiasing.
    pub fn product(&self, other: &Self) -> Self {
        dealias(&self.zip_map(other, |a, b| a * b))
    }

    /// `∫ f dx` over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f² dx`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Periodic translation by whole cells: `out(i, j) = f(i - s1, j - s2)`.
    pub fn shift(&self, s1: isize, s2: isize) -> Self {
        let (nx, ny) = (self.nx() as isize, self.ny() as isize);
        let mut out = vec![0.0; self.values.len()];
        for i in 0..nx {
            for j in 0..ny {
                let si = (i - s1).rem_euclid(nx);
                let sj = (j - s2).rem_euclid(ny);
                out[(i * ny + j) as usize] = self.values[(si * ny + sj) as usize];
            }
        }
        Self::from_values(&self.grid, out)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Velocity-like pair of scalar fields.
#[derive(Clone, Debug)]
pub struct VectorField2D {
    pub u1: SpectralField2D,
    pub u2: SpectralField2D,
}

impl VectorField2D {
    pub fn new(u1: SpectralField2D, u2: SpectralField2D) -> Self {
        Self { u1, u2 }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::new(SpectralField2D::zeros(grid), SpectralField2D::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    /// `max_x |u(x)|` (Euclidean).
    pub fn max_magnitude(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.u1.add(&other.u1), self.u2.add(&other.u2))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.u1.scale(s), self.u2.scale(s))
    }
}

/// Spectral partial derivative along `x1` (`axis = 0`) or `x2` (`axis = 1`).
pub fn partial(f: &SpectralField2D, axis: usize) -> SpectralField2D {
    let grid = Arc::clone(f.grid());
    f.map_coeffs(|p, c| {
        let (k1, k2) = grid.derivative_wavenumber(p);
        let k = if axis == 0 { k1 } else { k2 };
        c * Complex64::new(0.0, k)
    })
}

pub fn gradient(f: &SpectralField2D) -> VectorField2D {
    VectorField2D::new(partial(f, 0), partial(f, 1))
}

pub fn laplacian(f: &SpectralField2D) -> SpectralField2D {
    let grid = Arc::clone(f.grid());
    f.map_coeffs(|p, c| c * -grid.k_squared(p))
}

pub fn divergence(v: &VectorField2D) -> SpectralField2D {
    let grid = Arc::clone(v.grid());
    let (a, b) = (v.u1.coeffs(), v.u2.coeffs());
    let coeffs = (0..grid.len())
        .map(|p| {
            let (k1, k2) = grid.derivative_wavenumber(p);
            Complex64::new(0.0, k1) * a[p] + Complex64::new(0.0, k2) * b[p]
        })
        .collect();
    SpectralField2D::from_coeffs(&grid, coeffs)
}

/// Scalar curl `∂1 v2 − ∂2 v1`.
pub fn curl(v: &VectorField2D) -> SpectralField2D {
    let grid = Arc::clone(v.grid());
    let (a, b) = (v.u1.coeffs(), v.u2.coeffs());
    let coeffs = (0..grid.len())
        .map(|p| {
            let (k1, k2) = grid.derivative_wavenumber(p);
            Complex64::new(0.0, k1) * b[p] - Complex64::new(0.0, k2) * a[p]
        })
        .collect();
    SpectralField2D::from_coeffs(&grid, coeffs)
}

/// Orthogonal projection onto divergence-free fields. The zero mode is
/// kept; the Nyquist lines are treated with the derivative wavenumbers so
/// the result is divergence free under [`divergence`].
pub fn leray_project(v: &VectorField2D) -> VectorField2D {
    let grid = Arc::clone(v.grid());
    let (a, b) = (v.u1.coeffs(), v.u2.coeffs());
    let mut c1 = Vec::with_capacity(grid.len());
    let mut c2 = Vec::with_capacity(grid.len());
    for p in 0..grid.len() {
        let (k1, k2) = grid.derivative_wavenumber(p);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            c1.push(a[p]);
            c2.push(b[p]);
        } else {
            let kdotv = a[p] * k1 + b[p] * k2;
            c1.push(a[p] - kdotv * (k1 / kk));
            c2.push(b[p] - kdotv * (k2 / kk));
        }
    }
    VectorField2D::new(
        SpectralField2D::from_coeffs(&grid, c1),
        SpectralField2D::from_coeffs(&grid, c2),
    )
}

/// 2/3-rule truncation: zero every mode with `|k_i| > n_i / 3`.
pub fn dealias(f: &SpectralField2D) -> SpectralField2D {
    let grid = Arc::clone(f.grid());
    f.map_coeffs(|p, c| if grid.in_band(p) { c } else { Complex64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_diff(a: &SpectralField2D, b: &SpectralField2D) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid::new(12, 16).is_err());
    }

    #[test]
    fn round_trip_reproduces_samples() {
        let g = Grid::new(16, 8).unwrap();
        let f = SpectralField2D::from_fn(&g, |x, y| (x + 0.3).sin() * (2.0 * y).cos() + 0.1 * x);
        let back = SpectralField2D::from_coeffs(&g, f.coeffs().to_vec());
        assert!(max_diff(&f, &back) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn gradient_examples() {
        let g = Grid::square(16).unwrap();
        let c = gradient(&SpectralField2D::constant(&g, 3.0));
        assert!(c.u1.max_abs() < 1e-14 && c.u2.max_abs() < 1e-14);

        let s = gradient(&SpectralField2D::from_fn(&g, |x, _| x.sin()));
        let cos = SpectralField2D::from_fn(&g, |x, _| x.cos());
        assert!(max_diff(&s.u1, &cos) < 1e-13);
        assert!(s.u2.max_abs() < 1e-13);

        let f = SpectralField2D::from_fn(&g, |x, y| (2.0 * x).sin() * (3.0 * y).cos());
        let gf = gradient(&f);
        let d1 = SpectralField2D::from_fn(&g, |x, y| 2.0 * (2.0 * x).cos() * (3.0 * y).cos());
        let d2 = SpectralField2D::from_fn(&g, |x, y| -3.0 * (2.0 * x).sin() * (3.0 * y).sin());
        assert!(max_diff(&gf.u1, &d1) < 1e-12);
        assert!(max_diff(&gf.u2, &d2) < 1e-12);
    }

    #[test]
    fn laplacian_examples() {
        let g = Grid::square(16).unwrap();
        assert!(laplacian(&SpectralField2D::constant(&g, 2.0)).max_abs() < 1e-14);
        let s = SpectralField2D::from_fn(&g, |x, _| x.sin());
        assert!(max_diff(&laplacian(&s), &s.scale(-1.0)) < 1e-13);
        let f = SpectralField2D::from_fn(&g, |x, y| (2.0 * x).sin() * (3.0 * y).cos());
        assert!(max_diff(&laplacian(&f), &f.scale(-13.0)) < 1e-12);
    }

    #[test]
    fn leray_examples() {
        let g = Grid::square(16).unwrap();
        let phi = SpectralField2D::from_fn(&g, |x, _| -x.cos());
        let p = leray_project(&gradient(&phi));
        assert!(p.u1.max_abs() < 1e-14 && p.u2.max_abs() < 1e-14);

        let v = VectorField2D::new(
            SpectralField2D::from_fn(&g, |_, y| y.sin()),
            SpectralField2D::zeros(&g),
        );
        let p = leray_project(&v);
        assert!(max_diff(&p.u1, &v.u1) < 1e-14);
        assert!(p.u2.max_abs() < 1e-14);
    }

    #[test]
    fn leray_keeps_mean_flow() {
        let g = Grid::square(8).unwrap();
        let v = VectorField2D::new(
            SpectralField2D::constant(&g, 0.7),
            SpectralField2D::constant(&g, -0.2),
        );
        let p = leray_project(&v);
        assert_abs_diff_eq!(p.u1.mean(), 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(p.u2.mean(), -0.2, epsilon = 1e-14);
    }

    #[test]
    fn dealias_examples() {
        let g = Grid::square(16).unwrap();
        let low = SpectralField2D::from_fn(&g, |x, y| (2.0 * x).cos() + (5.0 * y).sin());
        assert!(max_diff(&dealias(&low), &low) < 1e-13);
        let nyq = SpectralField2D::from_fn(&g, |x, _| (8.0 * x).cos());
        assert!(dealias(&nyq).max_abs() < 1e-14);
    }

    #[test]
    fn translation_commutes_with_operators() {
        let g = Grid::square(16).unwrap();
        let f = SpectralField2D::from_fn(&g, |x, y| (x + 2.0 * y).sin() + (3.0 * x).cos() * y.sin());
        let a = laplacian(&f.shift(1, 0));
        let b = laplacian(&f).shift(1, 0);
        assert!(max_diff(&a, &b) < 1e-12);
        let a = gradient(&f.shift(0, 1));
        let b = gradient(&f);
        assert!(max_diff(&a.u2, &b.u2.shift(0, 1)) < 1e-12);
        assert!(max_diff(&a.u1, &b.u1.shift(0, 1)) < 1e-12);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = Grid::square(16).unwrap();
        let f = SpectralField2D::from_fn(&g, |x, y| (x - y).sin() * (2.0 * y).cos());
        assert!(curl(&gradient(&f)).max_abs() < 1e-12);
    }
}
