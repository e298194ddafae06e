//! Verification that the shell screens the interior: the conditional mean of
//! the centre spin given the full exterior has the same coefficients as the
//! one given the shell alone.
//!
//! Both routes here run on the covariance side (Schur complements of the
//! torus Green matrix), independent of the precision-side patch solves used
//! by `conditional_law`. The Green matrix is circulant, so the dense solve is
//! replaced by conjugate gradient with FFT-based matrix-vector products when
//! the conditioning set is large.

use super::{BoxGeometry, ConditionalError};
use crate::fft::NdFft;
use crate::lattice::{QPolynomial, TorusGrid};
use crate::solve::conjugate_gradient;
use crate::spectral::{SpectralError, SymbolGrid};
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct MarkovReport {
    /// Max absolute difference between full-exterior and shell-only
    /// conditional-mean coefficients (including coefficients that should
    /// vanish beyond the shell).
    pub residual: f64,
    pub exterior_sites: usize,
    pub shell_sites: usize,
}

/// Multiplication by the torus covariance `Sigma = J_eps^{-1}` via FFT.
struct CovarianceOperator {
    inv_symbol: Vec<f64>,
    fft: NdFft,
}

impl CovarianceOperator {
    fn new(q: &QPolynomial, grid: TorusGrid) -> Result<Self, SpectralError> {
        if grid.eps <= 0.0 {
            return Err(SpectralError::ZeroModeSingular);
        }
        let symbol = SymbolGrid::new(q, grid)?;
        Ok(Self {
            inv_symbol: symbol.values.iter().map(|&s| 1.0 / s).collect(),
            fft: NdFft::new(grid.d, grid.l),
        })
    }

    /// `out = Sigma v` for a full-torus vector.
    fn apply_full(&self, v: &[f64], out: &mut [f64]) {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (b, &s) in buf.iter_mut().zip(&self.inv_symbol) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }
}

/// Conditional-mean coefficients of the spin at `center` given the spins at
/// `conditioning` (site indices on the torus): the vector `w` solving
/// `Sigma_SS w = Sigma_{S, center}`, so that `E[phi_c | phi_S] = w . phi_S`.
pub fn conditional_center_coefficients(
    q: &QPolynomial,
    grid: TorusGrid,
    center: &[i64],
    conditioning: &[usize],
) -> Result<Vec<f64>, ConditionalError> {
    let op = CovarianceOperator::new(q, grid)
        .map_err(|_| ConditionalError::SolveFailed(f64::NAN))?;
    let n_full = grid.site_count();
    let center_idx = grid.index_of(center);
    // rhs: Sigma e_center restricted to the conditioning set
    let mut spike = vec![0.0; n_full];
    spike[center_idx] = 1.0;
    let mut column = vec![0.0; n_full];
    op.apply_full(&spike, &mut column);
    let rhs: Vec<f64> = conditioning.iter().map(|&i| column[i]).collect();

    let mut full = vec![0.0; n_full];
    let mut sigma_full = vec![0.0; n_full];
    let apply = |v: &[f64], out: &mut [f64]| {
        // embed -> Sigma -> restrict
        full.fill(0.0);
        for (&i, &vi) in conditioning.iter().zip(v) {
            full[i] = vi;
        }
        op.apply_full(&full, &mut sigma_full);
        for (o, &i) in out.iter_mut().zip(conditioning) {
            *o = sigma_full[i];
        }
    };
    let mut w = vec![0.0; conditioning.len()];
    let res = conjugate_gradient(apply, &rhs, &mut w, 1e-13, 20_000);
    if !res.converged {
        return Err(ConditionalError::SolveFailed(res.relative_residual));
    }
    Ok(w)
}

/// Compare full-exterior conditioning against shell-only conditioning for
/// the centre spin of `geometry` embedded in the torus.
pub fn markov_check(
    q: &QPolynomial,
    grid: TorusGrid,
    geometry: &BoxGeometry,
) -> Result<MarkovReport, ConditionalError> {
    let patch_side = 2 * geometry.outer_radius() as usize + 1;
    if grid.l < patch_side {
        return Err(ConditionalError::PatchDoesNotFit {
            l: grid.l,
            patch: patch_side,
        });
    }
    let interior: Vec<usize> = geometry
        .interior
        .iter()
        .map(|o| site_of(grid, &geometry.center, o))
        .collect();
    let shell: Vec<usize> = geometry
        .boundary
        .iter()
        .map(|o| site_of(grid, &geometry.center, o))
        .collect();
    let mut is_interior = vec![false; grid.site_count()];
    for &i in &interior {
        is_interior[i] = true;
    }
    let exterior: Vec<usize> = (0..grid.site_count()).filter(|&i| !is_interior[i]).collect();

    let w_ext = conditional_center_coefficients(q, grid, &geometry.center, &exterior)?;
    let w_shell = conditional_center_coefficients(q, grid, &geometry.center, &shell)?;

    let mut shell_coeff = vec![0.0; grid.site_count()];
    for (&i, &w) in shell.iter().zip(&w_shell) {
        shell_coeff[i] = w;
    }
    let mut residual = 0.0f64;
    for (&i, &w) in exterior.iter().zip(&w_ext) {
        residual = residual.max((w - shell_coeff[i]).abs());
    }
    Ok(MarkovReport {
        residual,
        exterior_sites: exterior.len(),
        shell_sites: shell.len(),
    })
}

fn site_of(grid: TorusGrid, center: &[i64], offset: &[i64]) -> usize {
    let coords: Vec<i64> = center.iter().zip(offset).map(|(&c, &o)| c + o).collect();
    grid.index_of(&coords)
}

/// Brute-force conditional mean from the dense covariance matrix: the Schur
/// complement `Sigma_{B,S} Sigma_{SS}^{-1} phi_S` assembled explicitly from a
/// Green table. Quadratic memory; the independent oracle for small tori.
pub fn dense_schur_mean(
    table: &crate::spectral::GreenTable,
    interior: &[usize],
    conditioning: &[usize],
    data: &[f64],
) -> Vec<f64> {
    let grid = table.grid;
    let s = conditioning.len();
    let mut sigma_ss = nalgebra::DMatrix::<f64>::zeros(s, s);
    for (a, &i) in conditioning.iter().enumerate() {
        let ci = grid.coords_of(i);
        for (b, &j) in conditioning.iter().enumerate() {
            let cj = grid.coords_of(j);
            let disp: Vec<i64> = ci.iter().zip(&cj).map(|(&x, &y)| x - y).collect();
            sigma_ss[(a, b)] = table.value(&disp);
        }
    }
    let chol = nalgebra::Cholesky::new(sigma_ss).expect("covariance submatrix is SPD");
    let rhs = nalgebra::DVector::from_column_slice(data);
    let weights = chol.solve(&rhs);
    interior
        .iter()
        .map(|&i| {
            let ci = grid.coords_of(i);
            let mut acc = 0.0;
            for (b, &j) in conditioning.iter().enumerate() {
                let cj = grid.coords_of(j);
                let disp: Vec<i64> = ci.iter().zip(&cj).map(|(&x, &y)| x - y).collect();
                acc += table.value(&disp) * weights[b];
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditional::conditional_law;
    use crate::lattice::LatticeField;
    use crate::rng::stream;
    use crate::spectral::GreenTable;
    use rand::Rng;

    #[test]
    fn markov_residual_small_free_field() {
        let grid = TorusGrid::new(2, 9, 0.3);
        let q = QPolynomial::free_field();
        let geometry = BoxGeometry::new(vec![0, 0], 5, 1).unwrap();
        let report = markov_check(&q, grid, &geometry).unwrap();
        assert!(report.residual < 1e-10, "residual {}", report.residual);
    }

    #[test]
    fn markov_residual_small_membrane() {
        let grid = TorusGrid::new(2, 10, 0.2);
        let q = QPolynomial::membrane();
        let geometry = BoxGeometry::new(vec![1, 2], 6, 2).unwrap();
        let report = markov_check(&q, grid, &geometry).unwrap();
        assert!(report.residual < 1e-10, "residual {}", report.residual);
    }

    #[test]
    fn thin_shell_fails_markov() {
        // conditioning on a shell thinner than the operator range must leak
        let grid = TorusGrid::new(2, 10, 0.2);
        let q = QPolynomial::membrane(); // range 2
        let geometry = BoxGeometry::new(vec![0, 0], 6, 2).unwrap();
        // keep only the inner half of the shell: sup distance exactly 2
        let thin: Vec<usize> = geometry
            .boundary
            .iter()
            .filter(|o| o.iter().map(|c| c.abs()).max().unwrap() == 2)
            .map(|o| site_of(grid, &geometry.center, o))
            .collect();
        let w_thin = conditional_center_coefficients(&q, grid, &geometry.center, &thin).unwrap();
        let exterior: Vec<usize> = {
            let interior: Vec<usize> = geometry
                .interior
                .iter()
                .map(|o| site_of(grid, &geometry.center, o))
                .collect();
            (0..grid.site_count()).filter(|i| !interior.contains(i)).collect()
        };
        let w_ext = conditional_center_coefficients(&q, grid, &geometry.center, &exterior).unwrap();
        let mut thin_embedded = vec![0.0; grid.site_count()];
        for (&i, &w) in thin.iter().zip(&w_thin) {
            thin_embedded[i] = w;
        }
        let mut residual = 0.0f64;
        for (&i, &w) in exterior.iter().zip(&w_ext) {
            residual = residual.max((w - thin_embedded[i]).abs());
        }
        assert!(residual > 1e-3, "thin shell must not screen: {residual}");
    }

    #[test]
    fn dense_schur_matches_patch_solver() {
        // covariance-route oracle vs precision-route solve, on a torus
        let grid = TorusGrid::new(2, 12, 0.4);
        let q = QPolynomial::membrane();
        let geometry = BoxGeometry::new(vec![0, 0], 6, 2).unwrap();
        let mut rng = stream(9, "schur", 0);
        let boundary: Vec<f64> = (0..geometry.boundary.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let law = conditional_law(&q, grid, &geometry, &boundary).unwrap();

        let table = GreenTable::compute(&q, grid).unwrap();
        let interior: Vec<usize> = geometry
            .interior
            .iter()
            .map(|o| site_of(grid, &geometry.center, o))
            .collect();
        let shell: Vec<usize> = geometry
            .boundary
            .iter()
            .map(|o| site_of(grid, &geometry.center, o))
            .collect();
        let oracle = dense_schur_mean(&table, &interior, &shell, &boundary);
        let mut worst = 0.0f64;
        for (a, b) in law.mean.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-8, "patch vs dense Schur gap {worst}");
        let _ = LatticeField::zeros(grid);
    }
}
