use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fokker_planck::KineticDensity;
use crate::grid::{Grid, SpectralField2D};

/// Symmetric polymer stress tensor field.
#[derive(Clone, Debug)]
pub struct StressField {
    pub s11: SpectralField2D,
    pub s12: SpectralField2D,
    pub s22: SpectralField2D,
}

impl StressField {
    pub fn new(s11: SpectralField2D, s12: SpectralField2D, s22: SpectralField2D) -> Self {
        Self { s11, s12, s22 }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::uniform(grid, [0.0, 0.0, 0.0])
    }

    /// Spatially constant `[σ11, σ12, σ22]`.
    pub fn uniform(grid: &Arc<Grid>, s: [f64; 3]) -> Self {
        Self {
            s11: SpectralField2D::constant(grid, s[0]),
            s12: SpectralField2D::constant(grid, s[1]),
            s22: SpectralField2D::constant(grid, s[2]),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.s11.grid()
    }

    pub fn trace(&self) -> SpectralField2D {
        self.s11.add(&self.s22)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            s11: self.s11.add(&other.s11),
            s12: self.s12.add(&other.s12),
            s22: self.s22.add(&other.s22),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { s11: self.s11.scale(c), s12: self.s12.scale(c), s22: self.s22.scale(c) }
    }

    /// `Σ_ij ‖σ_ij‖²_{L²}` with the off-diagonal counted twice.
    pub fn norm_sq(&self) -> f64 {
        self.s11.l2_norm_sq() + 2.0 * self.s12.l2_norm_sq() + self.s22.l2_norm_sq()
    }

    /// `‖self − reference‖ / ‖reference‖` in the Frobenius-L² norm; the
    /// absolute difference when the reference vanishes.
    pub fn relative_difference(&self, reference: &Self) -> f64 {
        let diff = Self {
            s11: self.s11.sub(&reference.s11),
            s12: self.s12.sub(&reference.s12),
            s22: self.s22.sub(&reference.s22),
        }
        .norm_sq()
        .sqrt();
        let scale = reference.norm_sq().sqrt();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// Largest pointwise entry difference.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        [
            self.s11.sub(&other.s11).max_abs(),
            self.s12.sub(&other.s12).max_abs(),
            self.s22.sub(&other.s22).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.s11.is_finite() && self.s12.is_finite() && self.s22.is_finite()
    }
}

/// `σ(x) = 2q ∫ |m|^{2(q-1)} m⊗m f(x, m) dm`.
pub fn kramer_stress(f: &KineticDensity, q: f64) -> Result<StressField> {
    kramer_stress_with_prefactor(f, q, 2.0 * q)
}

/// Kramer stress with an explicit prefactor in place of `2q`. Used by the
/// self-test to check that a perturbed constant is detected.
pub fn kramer_stress_with_prefactor(f: &KineticDensity, q: f64, prefactor: f64) -> Result<StressField> {
    if f.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kramer_stress input"));
    }
    let mgrid = f.mgrid();
    let weight = |i: usize, j: usize| {
        mgrid.sample(|a, b| {
            let m = [a, b];
            prefactor * (a * a + b * b).powf(q - 1.0) * m[i] * m[j]
        })
    };
    let stress = StressField {
        s11: f.weighted_field(&weight(0, 0)),
        s12: f.weighted_field(&weight(0, 1)),
        s22: f.weighted_field(&weight(1, 1)),
    };
    if !stress.is_finite() {
        return Err(Error::NonFinite("kramer stress"));
    }
    Ok(stress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fokker_planck::{equilibrium_density, PotentialSpec};
    use crate::mgrid::MGrid;

    fn single_cell(mgrid: &MGrid, target: (f64, f64)) -> Vec<f64> {
        let mut s = vec![0.0; mgrid.len()];
        let c = (0..mgrid.len())
            .min_by(|&a, &b| {
                let (pa, pb) = (mgrid.point(a), mgrid.point(b));
                let da = (pa.0 - target.0).hypot(pa.1 - target.1);
                let db = (pb.0 - target.0).hypot(pb.1 - target.1);
                da.total_cmp(&db)
            })
            .unwrap();
        s[c] = 1.0 / mgrid.cell_area();
        s
    }

    #[test]
    fn point_mass_stress() {
        // cell centres at ±0.5, ±1.5: the cell at (1.5, 0.5) stands in for a point mass
        let grid = Grid::square(4).unwrap();
        let mgrid = MGrid::new(4, 2.0).unwrap();
        let slice = single_cell(&mgrid, (1.5, 0.5));
        let f = KineticDensity::separable(&grid, mgrid, &SpectralField2D::constant(&grid, 1.0), &slice).unwrap();
        for q in [1.0, 2.0] {
            let s = kramer_stress(&f, q).unwrap();
            let r2: f64 = 1.5f64 * 1.5 + 0.25;
            let c = 2.0 * q * r2.powf(q - 1.0);
            assert!((s.s11.values()[0] - c * 2.25).abs() < 1e-12);
            assert!((s.s12.values()[3] - c * 0.75).abs() < 1e-12);
            assert!((s.s22.values()[5] - c * 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_stress_is_identity() {
        let grid = Grid::square(4).unwrap();
        let mgrid = MGrid::new(64, 6.0).unwrap();
        let eq = equilibrium_density(&PotentialSpec::hookean(), &mgrid).unwrap();
        let f = KineticDensity::separable(&grid, mgrid, &SpectralField2D::constant(&grid, 1.0), &eq).unwrap();
        let s = kramer_stress(&f, 1.0).unwrap();
        let id = StressField::uniform(&grid, [1.0, 0.0, 1.0]);
        assert!(s.max_abs_difference(&id) < 1e-8, "{}", s.max_abs_difference(&id));
        assert!(s.trace().min() > 0.0);
    }

    #[test]
    fn relative_difference_of_scaled_field() {
        let grid = Grid::square(4).unwrap();
        let a = StressField::uniform(&grid, [1.0, 0.5, 2.0]);
        assert!((a.scale(1.1).relative_difference(&a) - 0.1).abs() < 1e-14);
        assert_eq!(a.relative_difference(&a), 0.0);
    }
}
