use crate::error::{Error, Result};

use super::MomentTable;

pub const CARLEMAN_CAVEAT: &str = "partial sums only: divergence of the Carleman series \
cannot be decided from finitely many terms";

/// Partial sums `S_n = Σ_{k=1}^n M_{2k}^{-1/(2k)}` along each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanReport {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub caveat: &'static str,
}

pub fn carleman_partial_sums(m: &MomentTable, n: usize) -> Result<CarlemanReport> {
    if m.degree() < 2 * n {
        return Err(Error::Capacity { requested: 2 * n, capacity: m.degree() });
    }
    let sums = |axis: usize| -> Result<Vec<f64>> {
        let mut acc = 0.0;
        (1..=n)
            .map(|k| {
                let v = if axis == 0 { m.at(2 * k, 0) } else { m.at(0, 2 * k) };
                if !(v > 0.0) {
                    return Err(Error::Domain(format!(
                        "even moment of degree {} along x{} is not positive ({v})",
                        2 * k,
                        axis + 1
                    )));
                }
                acc += v.powf(-1.0 / (2 * k) as f64);
                Ok(acc)
            })
            .collect()
    };
    Ok(CarlemanReport { x1: sums(0)?, x2: sums(1)?, caveat: CARLEMAN_CAVEAT })
}
