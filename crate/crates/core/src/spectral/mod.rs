//! Fourier-side computations: the symbol `q(eps + lambda(theta))`, Green's
//! functions on the torus (FFT) and on the infinite lattice (quadrature),
//! the Green's-function decay constant, and exact spectral sampling.

mod green;
mod quadrature;
mod sample;

pub use green::{decay_constant, DecayEstimate, DecayRow, GreenTable};
pub use quadrature::{green_infinite, GreenValue, QuadratureSpec};
pub use sample::{empirical_covariance, spectral_sample, CovarianceRow, SpectralSampler};

use crate::lattice::{QPolynomial, TorusGrid};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("zero mode singular: the symbol vanishes at theta = 0 when eps = 0")]
    ZeroModeSingular,
    #[error("symbol is not strictly positive: q(eps + lambda) = {value} at frequency {index:?}")]
    SymbolNotPositive { index: Vec<i64>, value: f64 },
    #[error("torus side {l} cannot resolve operator range {range}")]
    GridTooSmall { l: usize, range: usize },
    #[error("need at least {need} samples (got {got})")]
    NotEnoughSamples { need: usize, got: usize },
    #[error("inverse FFT left an imaginary residue {0}, expected a real table")]
    ImaginaryResidue(f64),
}

/// Fourier multiplier of `-Delta`: `lambda(theta) = 1 - (1/d) sum_i cos(theta_i)`.
pub fn lambda(theta: &[f64]) -> f64 {
    let d = theta.len() as f64;
    1.0 - theta.iter().map(|t| t.cos()).sum::<f64>() / d
}

/// The symbol of `J_eps`: `q(eps + lambda(theta))`.
pub fn symbol_value(q: &QPolynomial, eps: f64, theta: &[f64]) -> f64 {
    q.eval(eps + lambda(theta))
}

/// The symbol tabulated over all torus frequencies `m in [0, L)^d`.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl SymbolGrid {
    /// Tabulate the symbol; fails if any value is non-positive (which can
    /// only happen at the zero mode when `eps = 0`, or when the model
    /// violates symbol positivity).
    pub fn new(q: &QPolynomial, grid: TorusGrid) -> Result<Self, SpectralError> {
        grid.check_operator_range(q.max_degree())
            .map_err(|_| SpectralError::GridTooSmall {
                l: grid.l,
                range: q.max_degree(),
            })?;
        let l = grid.l;
        let two_pi = 2.0 * std::f64::consts::PI;
        // per-axis cosine table: cos(2 pi m / L)
        let cos_table: Vec<f64> = (0..l).map(|m| (two_pi * m as f64 / l as f64).cos()).collect();
        let n = grid.site_count();
        let mut values = vec![0.0; n];
        let d = grid.d;
        let inv_d = 1.0 / d as f64;
        let mut freq = vec![0usize; d];
        for slot in values.iter_mut() {
            let cos_sum: f64 = freq.iter().map(|&m| cos_table[m]).sum();
            let lam = 1.0 - inv_d * cos_sum;
            let v = q.eval(grid.eps + lam);
            if v <= 0.0 {
                let index: Vec<i64> = freq.iter().map(|&m| m as i64).collect();
                if index.iter().all(|&m| m == 0) && grid.eps == 0.0 {
                    return Err(SpectralError::ZeroModeSingular);
                }
                return Err(SpectralError::SymbolNotPositive { index, value: v });
            }
            *slot = v;
            for a in (0..d).rev() {
                freq[a] += 1;
                if freq[a] == l {
                    freq[a] = 0;
                } else {
                    break;
                }
            }
        }
        Ok(Self { grid, values })
    }

    /// Max relative asymmetry between `m` and `-m mod L`; zero for an exact
    /// symbol table.
    pub fn reflection_asymmetry(&self) -> f64 {
        let grid = self.grid;
        let mut worst = 0.0f64;
        for idx in 0..grid.site_count() {
            let coords = grid.coords_of(idx);
            let neg: Vec<i64> = coords.iter().map(|&c| -c).collect();
            let other = self.values[grid.index_of(&neg)];
            let denom = self.values[idx].abs().max(1e-300);
            worst = worst.max((self.values[idx] - other).abs() / denom);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::QPolynomial;

    #[test]
    fn symbol_at_zero_is_zero() {
        let q = QPolynomial::mixed();
        assert_eq!(symbol_value(&q, 0.0, &[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn symbol_at_corner_is_q_of_two() {
        let q = QPolynomial::mixed();
        let pi = std::f64::consts::PI;
        let v = symbol_value(&q, 0.0, &[pi, pi, pi]);
        assert!((v - q.eval(2.0)).abs() < 1e-14);
    }

    #[test]
    fn symbol_free_field_example() {
        let q = QPolynomial::free_field();
        let v = symbol_value(&q, 0.0, &[std::f64::consts::FRAC_PI_2, 0.0, 0.0]);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn symbol_grid_rejects_zero_eps() {
        let grid = TorusGrid::new(3, 8, 0.0);
        match SymbolGrid::new(&QPolynomial::free_field(), grid) {
            Err(SpectralError::ZeroModeSingular) => {}
            other => panic!("expected zero-mode error, got {other:?}"),
        }
    }

    #[test]
    fn symbol_grid_is_symmetric_and_positive() {
        let grid = TorusGrid::new(3, 8, 0.05);
        let sg = SymbolGrid::new(&QPolynomial::membrane(), grid).unwrap();
        assert!(sg.values.iter().all(|&v| v > 0.0));
        assert!(sg.reflection_asymmetry() < 1e-12);
    }
}
