use statrs::function::factorial::factorial;

use super::MomentTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XrVariant {
    /// `Σ_p ‖M̄_p‖ r^p / p!`
    Full,
    /// `Σ_p ‖M̄_{2p}‖ r^{2p} / (2p)!`
    Even,
}

/// Truncated exponential moment norm together with its truncation record.
#[derive(Clone, Debug, PartialEq)]
pub struct XrNorm {
    pub value: f64,
    /// Highest radial degree summed.
    pub degree: usize,
    /// Geometric extrapolation of the neglected tail from the ratio of the
    /// last two included terms; infinite when that ratio is ≥ 1.
    pub tail_estimate: f64,
}

/// `F[μ](r)` or `F[μ]^e(r)` for an x-indexed family of tables, each sample
/// carrying quadrature weight `cell_area`. Every table must hold radial
/// moments; the series stops at the smallest table degree.
pub fn x_r_norm(tables: &[MomentTable], cell_area: f64, r: f64, variant: XrVariant) -> XrNorm {
    assert!(r > 0.0, "x_r_norm needs r > 0");
    if tables.is_empty() {
        return XrNorm { value: 0.0, degree: 0, tail_estimate: 0.0 };
    }
    let degree = tables.iter().map(MomentTable::degree).min().unwrap_or(0);
    let step = match variant {
        XrVariant::Full => 1,
        XrVariant::Even => 2,
    };
    let terms: Vec<f64> = (0..=degree)
        .step_by(step)
        .map(|p| {
            let l2 = tables
                .iter()
                .map(|t| {
                    let v = t.radial().expect("x_r_norm needs radial moments")[p];
                    v * v
                })
                .sum::<f64>()
                * cell_area;
            l2.sqrt() * r.powi(p as i32) / factorial(p as u64)
        })
        .collect();
    let value = terms.iter().sum();
    let tail_estimate = match terms.as_slice() {
        [.., prev, last] if *prev > 0.0 => {
            let ratio = last / prev;
            if ratio < 1.0 {
                last * ratio / (1.0 - ratio)
            } else {
                f64::INFINITY
            }
        }
        [.., last] if *last == 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    let degree = degree - degree % step;
    XrNorm { value, degree, tail_estimate }
}
