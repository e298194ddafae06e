//! Entrywise positivity of the inverse precision operator. Nonnegative
//! covariances make the field positively associated; the property is
//! classical for the free field and open for higher minimal degree, so the
//! scan reports whatever sign pattern appears rather than asserting one.

use super::ExperimentError;
use crate::lattice::{QPolynomial, TorusGrid};
use crate::spectral::GreenTable;
use serde::{Deserialize, Serialize};

/// Minimum entry of `J_eps^{-1}` on the torus, per mass value. By translation
/// invariance the single FFT column is exact and exhausts all columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityScan {
    pub eps: f64,
    pub min_entry: f64,
    pub min_displacement: Vec<i64>,
    pub max_entry: f64,
    /// `min >= -1e-12 * max`: no sign change beyond rounding noise.
    pub consistent: bool,
}

pub fn inverse_positivity_scan(
    q: &QPolynomial,
    d: usize,
    l: usize,
    eps_list: &[f64],
) -> Result<Vec<PositivityScan>, ExperimentError> {
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let grid = TorusGrid::new(d, l, eps);
        let table = GreenTable::compute(q, grid)?;
        let mut min_entry = f64::INFINITY;
        let mut min_idx = 0usize;
        let mut max_entry = f64::NEG_INFINITY;
        for (idx, &v) in table.values.iter().enumerate() {
            if v < min_entry {
                min_entry = v;
                min_idx = idx;
            }
            max_entry = max_entry.max(v);
        }
        out.push(PositivityScan {
            eps,
            min_entry,
            min_displacement: grid.canonical_displacement(&grid.coords_of(min_idx)),
            max_entry,
            consistent: min_entry >= -1e-12 * max_entry,
        });
    }
    Ok(out)
}
