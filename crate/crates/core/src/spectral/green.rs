//! Green's function tables on the torus and the decay constant of the
//! infinite-lattice Green's function.

use super::quadrature::{green_infinite, QuadratureSpec};
use super::{SpectralError, SymbolGrid};
use crate::fft::NdFft;
use crate::lattice::{QPolynomial, TorusGrid};
use rustfft::num_complex::Complex64;

/// Covariances `G(0, x)` on the torus, indexed by displacement.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl GreenTable {
    /// Invert the symbol on the torus: `G(0,x) = (1/L^d) sum_m e^{i theta_m.x} / q(eps + lambda_m)`.
    /// Requires `eps > 0`; the zero mode is singular otherwise.
    pub fn compute(q: &QPolynomial, grid: TorusGrid) -> Result<Self, SpectralError> {
        if grid.eps <= 0.0 {
            return Err(SpectralError::ZeroModeSingular);
        }
        let symbol = SymbolGrid::new(q, grid)?;
        let mut data: Vec<Complex64> = symbol
            .values
            .iter()
            .map(|&s| Complex64::new(1.0 / s, 0.0))
            .collect();
        let fft = NdFft::new(grid.d, grid.l);
        fft.inverse(&mut data);
        // The spectrum is real and even, so the table must be real to rounding.
        let mut max_im = 0.0f64;
        let mut max_re = 0.0f64;
        let values: Vec<f64> = data
            .iter()
            .map(|z| {
                max_im = max_im.max(z.im.abs());
                max_re = max_re.max(z.re.abs());
                z.re
            })
            .collect();
        if max_im > 1e-10 * max_re {
            return Err(SpectralError::ImaginaryResidue(max_im / max_re));
        }
        Ok(Self { grid, values })
    }

    /// Covariance at a displacement (any integer vector; reduced mod L).
    pub fn value(&self, displacement: &[i64]) -> f64 {
        self.values[self.grid.index_of(displacement)]
    }

    /// Variance of a single spin.
    pub fn variance(&self) -> f64 {
        self.values[0]
    }

    /// Max absolute violation of cubic symmetry (coordinate permutations and
    /// sign flips) over a sample of displacements.
    pub fn cubic_asymmetry(&self) -> f64 {
        let grid = self.grid;
        let mut worst = 0.0f64;
        for idx in 0..grid.site_count() {
            let coords = grid.canonical_displacement(&grid.coords_of(idx));
            // canonical class representative: sorted absolute components
            let mut class: Vec<i64> = coords.iter().map(|c| c.abs()).collect();
            class.sort_unstable();
            let rep = self.values[grid.index_of(&class)];
            worst = worst.max((self.values[idx] - rep).abs());
        }
        worst
    }
}

/// One radius of the decay table: the ratio `q_k * G(0,x) * |x|^{d-2k}`.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub radius: f64,
    pub along_axis: f64,
    pub along_diagonal: f64,
}

/// Estimate of the decay constant `eta_k = lim q_k G(0,x) |x|^{d-2k}`.
#[derive(Debug, Clone)]
pub struct DecayEstimate {
    pub eta_k: f64,
    /// Intercept of the same fit along the diagonal direction.
    pub eta_k_diagonal: f64,
    pub fit_error: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayEstimate {
    /// Relative spread of the tabulated ratios over the top half of radii.
    pub fn upper_half_variation(&self) -> f64 {
        let half = self.rows.len() / 2;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.rows[half..] {
            for v in [row.along_axis, row.along_diagonal] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (hi - lo) / hi.abs().max(1e-300)
    }
}

/// Tabulate `r(x) = q_k G(0,x) |x|^{d-2k}` along a coordinate axis and along
/// the diagonal for integer radii in `radii`, and extrapolate the large-`|x|`
/// limit by fitting `r = eta_k + c/|x|`.
pub fn decay_constant(
    q: &QPolynomial,
    d: usize,
    radii: std::ops::RangeInclusive<usize>,
    quad: &QuadratureSpec,
) -> DecayEstimate {
    let k = q.min_degree();
    let qk = q.leading_coeff();
    let power = (d as i32) - 2 * (k as i32);
    let mut rows = Vec::new();
    let mut axis_pts = Vec::new();
    let mut diag_pts = Vec::new();
    for r in radii {
        let mut axis = vec![0i64; d];
        axis[0] = r as i64;
        let g_axis = green_infinite(q, d, &axis, quad).value;
        let ratio_axis = qk * g_axis * (r as f64).powi(power);

        // diagonal site with components ~ r/sqrt(d)
        let comp = ((r as f64) / (d as f64).sqrt()).round().max(1.0) as i64;
        let diag = vec![comp; d];
        let rad_diag = ((comp * comp * d as i64) as f64).sqrt();
        let g_diag = green_infinite(q, d, &diag, quad).value;
        let ratio_diag = qk * g_diag * rad_diag.powi(power);

        rows.push(DecayRow {
            radius: r as f64,
            along_axis: ratio_axis,
            along_diagonal: ratio_diag,
        });
        axis_pts.push((r as f64, ratio_axis));
        diag_pts.push((rad_diag, ratio_diag));
    }
    let (eta_axis, err_axis) = fit_intercept(&axis_pts);
    let (eta_diag, err_diag) = fit_intercept(&diag_pts);
    DecayEstimate {
        eta_k: eta_axis,
        eta_k_diagonal: eta_diag,
        fit_error: err_axis.max(err_diag),
        rows,
    }
}

/// Least squares for `ratio = eta + c / radius`; returns `(eta, rms residual)`.
fn fit_intercept(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(r, _)| 1.0 / r).sum();
    let sxx: f64 = points.iter().map(|(r, _)| 1.0 / (r * r)).sum();
    let sy: f64 = points.iter().map(|(_, y)| *y).sum();
    let sxy: f64 = points.iter().map(|(r, y)| y / r).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-30 {
        return (sy / n, f64::INFINITY);
    }
    let eta = (sy * sxx - sx * sxy) / det;
    let c = (n * sxy - sx * sy) / det;
    let rms = (points
        .iter()
        .map(|(r, y)| {
            let res = y - eta - c / r;
            res * res
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (eta, rms)
}
