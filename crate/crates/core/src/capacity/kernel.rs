//! The Riesz-type kernel operator `K_k f(x) = int_V g_k(x-y) f(y) dy` with
//! `g_k(x) = (eta_k/q_k) |x|^{2k-d}`, discretized over cells of the unit
//! cube, and the dual capacity functionals built on it.

use super::CapacityError;
use crate::lattice::QPolynomial;
use crate::spectral::{decay_constant, QuadratureSpec};
use nalgebra::{DMatrix, DVector};

/// Dense Galerkin matrix of the kernel over cube cells: `M[i][j]` is the
/// kernel at the cell-centre displacement, with the singular diagonal
/// replaced by the analytic cell average.
pub struct KernelOperator {
    pub k: usize,
    pub d: usize,
    pub eta_k: f64,
    pub q_k: f64,
    pub resolution: usize,
    /// cell volume `(2/resolution)^d`
    pub cell_volume: f64,
    pub matrix: DMatrix<f64>,
    /// cell centres, row-major
    centers: Vec<Vec<f64>>,
}

const MAX_DENSE_ENTRIES: u128 = 70_000_000;

/// Cell centres of the uniform partition of `[-1,1]^d`.
fn cube_cells(d: usize, resolution: usize) -> Vec<Vec<f64>> {
    let s = 2.0 / resolution as f64;
    let n = resolution.pow(d as u32);
    let mut centers = Vec::with_capacity(n);
    let mut idx = vec![0usize; d];
    for _ in 0..n {
        centers.push(
            idx.iter()
                .map(|&i| -1.0 + (i as f64 + 0.5) * s)
                .collect::<Vec<f64>>(),
        );
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] == resolution {
                idx[a] = 0;
            } else {
                break;
            }
        }
    }
    centers
}

/// `int_{[-1,1]^d} |u|^{2k-d} du`, by self-similarity: the integral over the
/// half cube is `2^{-2k}` of the whole, so only the regular shell between
/// them needs quadrature (midpoint, Richardson-refined).
fn unit_cube_kernel_integral(k: usize, d: usize) -> f64 {
    let p = 2.0 * k as f64 - d as f64;
    let shell = |n: usize| -> f64 {
        let s = 2.0 / n as f64;
        let mut total = 0.0;
        let mut idx = vec![0usize; d];
        let count = n.pow(d as u32);
        for _ in 0..count {
            let u: Vec<f64> = idx.iter().map(|&i| -1.0 + (i as f64 + 0.5) * s).collect();
            let sup = u.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
            if sup > 0.5 {
                let r2: f64 = u.iter().map(|&c| c * c).sum();
                total += r2.powf(0.5 * p);
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] == n {
                    idx[a] = 0;
                } else {
                    break;
                }
            }
        }
        total * s.powi(d as i32)
    };
    let n = if d <= 3 { 64 } else { 16 };
    let coarse = shell(n);
    let fine = shell(2 * n);
    // midpoint on a smooth integrand: error ~ n^-2
    let shell_value = (4.0 * fine - coarse) / 3.0;
    shell_value / (1.0 - 0.25f64.powi(k as i32))
}

/// Assemble the dense kernel matrix at `resolution` cells per axis over `V`.
pub fn kernel_matrix(
    k: usize,
    d: usize,
    eta_k: f64,
    q_k: f64,
    resolution: usize,
) -> Result<KernelOperator, CapacityError> {
    if d < 2 * k + 1 {
        return Err(CapacityError::KernelNotIntegrable { k, d });
    }
    let cells = resolution.pow(d as u32);
    let entries = (cells as u128) * (cells as u128);
    if entries > MAX_DENSE_ENTRIES {
        return Err(CapacityError::MemoryGuard {
            cells,
            entries,
            cap: MAX_DENSE_ENTRIES,
        });
    }
    let centers = cube_cells(d, resolution);
    let s = 2.0 / resolution as f64;
    let amp = eta_k / q_k;
    let power = d as i32 - 2 * k as i32; // positive: g = amp / |x|^power
    // diagonal: amp * cell average of |y|^{2k-d} over a side-s cell
    let i_unit = unit_cube_kernel_integral(k, d);
    let half = 0.5 * s;
    let diag = amp * half.powi(2 * k as i32) * i_unit / s.powi(d as i32);

    let mut matrix = DMatrix::<f64>::zeros(cells, cells);
    for i in 0..cells {
        matrix[(i, i)] = diag;
        for j in 0..i {
            let r2: f64 = centers[i]
                .iter()
                .zip(&centers[j])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            let v = amp / r2.sqrt().powi(power);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(KernelOperator {
        k,
        d,
        eta_k,
        q_k,
        resolution,
        cell_volume: s.powi(d as i32),
        matrix,
        centers,
    })
}

impl KernelOperator {
    pub fn cells(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// `<f, K f>_V` for cell values `f`.
    pub fn quad_form(&self, f: &[f64]) -> f64 {
        let v = DVector::from_column_slice(f);
        let kf = &self.matrix * &v;
        self.cell_volume * self.cell_volume * v.dot(&kf)
    }

    /// `<f, 1_V>_V` for cell values `f`.
    pub fn inner_with_one(&self, f: &[f64]) -> f64 {
        self.cell_volume * f.iter().sum::<f64>()
    }

    /// Solve `K f = 1_V` (the equilibrium density), via Cholesky.
    pub fn solve_equilibrium(&self) -> Result<Vec<f64>, CapacityError> {
        let chol = nalgebra::Cholesky::new(self.matrix.clone())
            .ok_or(CapacityError::NotPositiveDefinite(f64::NAN))?;
        // K f = 1 discretizes to vol * M f = 1
        let rhs = DVector::from_element(self.cells(), 1.0 / self.cell_volume);
        Ok(chol.solve(&rhs).as_slice().to_vec())
    }
}

/// Both dual functionals at `f`: the linear form `2<f,1> - <f,Kf>` and the
/// Rayleigh quotient `<f,1>^2 / <f,Kf>`.
pub fn dual_values(op: &KernelOperator, f: &[f64]) -> Result<(f64, f64), CapacityError> {
    let quad = op.quad_form(f);
    let linear_part = op.inner_with_one(f);
    if quad == 0.0 {
        return Err(CapacityError::ZeroFunction);
    }
    Ok((2.0 * linear_part - quad, linear_part * linear_part / quad))
}

/// Full symmetric eigendecomposition route: `sum_i <e_i, 1_V>^2 / lambda_i`
/// with the operator's (positive) spectrum returned alongside.
pub fn eigen_capacity(op: &KernelOperator) -> Result<(f64, Vec<f64>), CapacityError> {
    let eig = op.matrix.clone().symmetric_eigen();
    let n = op.cells();
    let mut value = 0.0;
    let mut spectrum = Vec::with_capacity(n);
    for i in 0..n {
        let lam_matrix = eig.eigenvalues[i];
        // operator eigenvalue: K ~ vol * M on cell values
        let lam_op = lam_matrix * op.cell_volume;
        if lam_matrix <= 0.0 {
            return Err(CapacityError::NotPositiveDefinite(lam_op));
        }
        spectrum.push(lam_op);
        let overlap: f64 = eig.eigenvectors.column(i).iter().sum();
        value += overlap * overlap / lam_matrix;
    }
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((value, spectrum))
}

/// Outcome of probing the inverse identity
/// `c1 <h, K_k (-Delta)^k f>_V = <h, f>_V` over candidate normalizations.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    /// (normalization constant, relative residual), in candidate order
    /// `q_k/(2d)^{2k}`, `q_k/(2d)^k`, `q_k`.
    pub candidates: Vec<(f64, f64)>,
    pub best: usize,
    pub eta_k: f64,
}

/// Probe which constant makes the kernel invert the continuum polyharmonic
/// operator, using a smooth compactly supported bump `f` and a polynomial
/// test function `h`. The polyharmonic image `(-Delta)^k f` comes from
/// centred finite differences on the cell grid; the decay constant is
/// measured from the model's Green's function.
pub fn verify_inverse_identity(
    q: &QPolynomial,
    d: usize,
    resolution: usize,
) -> Result<IdentityReport, CapacityError> {
    let k = q.min_degree();
    if d < 2 * k + 1 {
        return Err(CapacityError::KernelNotIntegrable { k, d });
    }
    let quad = QuadratureSpec::for_dimension(d);
    let radii = if d <= 3 { 10..=20 } else { 6..=12 };
    let decay = decay_constant(q, d, radii, &quad);
    let eta_k = decay.eta_k;
    let q_k = q.leading_coeff();

    let centers = cube_cells(d, resolution);
    let cells = centers.len();
    let s = 2.0 / resolution as f64;
    let vol = s.powi(d as i32);

    // bump of smoothness C^{2k}, supported on [-0.7, 0.7]^d
    let m = 2 * k + 1;
    let bump = |x: &[f64]| -> f64 {
        let mut acc = 1.0;
        for &xi in x {
            let t = 0.49 - xi * xi;
            if t <= 0.0 {
                return 0.0;
            }
            acc *= t.powi(m as i32);
        }
        acc
    };
    let test_h = |x: &[f64]| -> f64 { x.iter().map(|&xi| 1.0 - xi * xi).product() };

    let f_vals: Vec<f64> = centers.iter().map(|c| bump(c)).collect();
    let h_vals: Vec<f64> = centers.iter().map(|c| test_h(c)).collect();

    // (-Delta_c)^k f by k applications of the 2d+1 stencil / s^2, evaluated
    // on the cell grid with zero beyond the cube (the bump vanishes there
    // with margin, so truncation is exact)
    let mut poly = f_vals.clone();
    let mut scratch = vec![0.0; cells];
    let res = resolution;
    for _ in 0..k {
        for (idx, slot) in scratch.iter_mut().enumerate() {
            let mut acc = -2.0 * d as f64 * poly[idx];
            let mut stride = 1usize;
            let mut rem = idx;
            // row-major: last axis has stride 1
            for _a in 0..d {
                let c = rem % res;
                if c + 1 < res {
                    acc += poly[idx + stride];
                }
                if c > 0 {
                    acc += poly[idx - stride];
                }
                rem /= res;
                stride *= res;
            }
            *slot = -acc / (s * s);
        }
        poly.copy_from_slice(&scratch);
    }

    // K applied to the polyharmonic image, matrix-free
    let amp = eta_k / q_k;
    let power = d as i32 - 2 * k as i32;
    let i_unit = unit_cube_kernel_integral(k, d);
    let diag = amp * (0.5 * s).powi(2 * k as i32) * i_unit / s.powi(d as i32);
    let k_poly: Vec<f64> = (0..cells)
        .map(|i| {
            let mut acc = 0.0;
            for (j, pj) in poly.iter().enumerate() {
                if i == j {
                    acc += diag * pj;
                } else {
                    let r2: f64 = centers[i]
                        .iter()
                        .zip(&centers[j])
                        .map(|(&a, &b)| (a - b) * (a - b))
                        .sum();
                    acc += amp / r2.sqrt().powi(power) * pj;
                }
            }
            acc * vol
        })
        .collect();

    let lhs_raw: f64 = vol * h_vals.iter().zip(&k_poly).map(|(h, kp)| h * kp).sum::<f64>();
    let rhs: f64 = vol * h_vals.iter().zip(&f_vals).map(|(h, f)| h * f).sum::<f64>();

    let two_d = 2.0 * d as f64;
    let candidates_c1 = [
        q_k / two_d.powi(2 * k as i32),
        q_k / two_d.powi(k as i32),
        q_k,
    ];
    let mut candidates = Vec::new();
    let mut best = 0;
    let mut best_res = f64::INFINITY;
    for (i, &c1) in candidates_c1.iter().enumerate() {
        let residual = (c1 * lhs_raw - rhs).abs() / rhs.abs().max(1e-300);
        candidates.push((c1, residual));
        if residual < best_res {
            best_res = residual;
            best = i;
        }
    }
    Ok(IdentityReport {
        candidates,
        best,
        eta_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_integral_d3_k1() {
        // int_{[-1,1]^3} |u|^{-1} du: compare against a high-resolution
        // direct evaluation with the same self-similar reduction at depth 2
        let i1 = unit_cube_kernel_integral(1, 3);
        // independent check: integrate in spherical shells numerically
        // int |u|^{-1} = int_0^sqrt(3) r^{-1} * area({|u|=r} cap cube) dr;
        // instead compare coarse vs fine self-similar values
        let coarse = {
            // plain midpoint over the whole cube, singular cell dropped:
            // converges slowly from below; just sanity-bound the value
            let n = 101usize; // odd: no node at the origin... center cell is at origin
            let s = 2.0 / n as f64;
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let x = -1.0 + (i as f64 + 0.5) * s;
                        let y = -1.0 + (j as f64 + 0.5) * s;
                        let z = -1.0 + (l as f64 + 0.5) * s;
                        let r = (x * x + y * y + z * z).sqrt();
                        if r > 1e-9 {
                            total += 1.0 / r;
                        }
                    }
                }
            }
            total * s * s * s
        };
        assert!((i1 - coarse).abs() < 0.02 * i1, "{i1} vs {coarse}");
    }

    #[test]
    fn kernel_matrix_is_spd_and_scales_linearly() {
        let a = kernel_matrix(1, 3, 0.5, 1.0, 5).unwrap();
        let b = kernel_matrix(1, 3, 1.5, 1.0, 5).unwrap();
        for i in 0..a.cells() {
            for j in 0..a.cells() {
                assert!((3.0 * a.matrix[(i, j)] - b.matrix[(i, j)]).abs() < 1e-12);
            }
        }
        let (value, spectrum) = eigen_capacity(&a).unwrap();
        assert!(value > 0.0);
        assert!(spectrum.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn memory_guard_triggers() {
        assert!(matches!(
            kernel_matrix(1, 3, 0.5, 1.0, 40),
            Err(CapacityError::MemoryGuard { .. })
        ));
    }

    #[test]
    fn kernel_rejects_low_dimension() {
        assert!(matches!(
            kernel_matrix(2, 4, 0.5, 1.0, 4),
            Err(CapacityError::KernelNotIntegrable { .. })
        ));
    }

    #[test]
    fn constant_function_image_matches_quadrature() {
        // (K 1)(centre cell) ~ amp * int_V |y|^{2k-d} dy restricted... checked
        // against a fine midpoint quadrature of the same integral
        let op = kernel_matrix(1, 3, 0.45, 1.0, 9).unwrap();
        let ones = vec![1.0; op.cells()];
        let center_idx = op.cells() / 2; // odd resolution: true centre cell
        let kf = {
            let v = DVector::from_column_slice(&ones);
            let kv = &op.matrix * &v;
            kv[center_idx] * op.cell_volume
        };
        // fine quadrature of amp * int_V |y|^{-1} dy around the centre
        let fine = {
            let n = 129usize;
            let s = 2.0 / n as f64;
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let x = -1.0 + (i as f64 + 0.5) * s;
                        let y = -1.0 + (j as f64 + 0.5) * s;
                        let z = -1.0 + (l as f64 + 0.5) * s;
                        let r = (x * x + y * y + z * z).sqrt();
                        if r > 1e-12 {
                            total += 1.0 / r;
                        }
                    }
                }
            }
            0.45 * total * s * s * s
        };
        assert!((kf - fine).abs() < 0.01 * fine, "{kf} vs {fine}");
    }

    #[test]
    fn dual_linear_maximized_at_equilibrium() {
        let op = kernel_matrix(1, 3, 0.45, 1.0, 6).unwrap();
        let f_star = op.solve_equilibrium().unwrap();
        let (linear, rayleigh) = dual_values(&op, &f_star).unwrap();
        // at the maximizer both functionals coincide (complete the square)
        assert!(
            (linear - rayleigh).abs() < 1e-8 * linear.abs(),
            "{linear} vs {rayleigh}"
        );
        let (eigen, _) = eigen_capacity(&op).unwrap();
        assert!(
            (eigen - linear).abs() < 1e-8 * linear.abs(),
            "eigen {eigen} vs linear {linear}"
        );
        // scaled indicator: maximum over t of the linear form equals the
        // rayleigh quotient of the indicator
        let ones = vec![1.0; op.cells()];
        let (_, ind_rayleigh) = dual_values(&op, &ones).unwrap();
        let t_star = op.inner_with_one(&ones) / op.quad_form(&ones);
        let scaled: Vec<f64> = ones.iter().map(|v| v * t_star).collect();
        let (lin_scaled, _) = dual_values(&op, &scaled).unwrap();
        assert!((lin_scaled - ind_rayleigh).abs() < 1e-10 * ind_rayleigh);
        // and the supremum dominates it
        assert!(eigen >= lin_scaled - 1e-10);
    }

    #[test]
    fn zero_function_rejected_for_rayleigh() {
        let op = kernel_matrix(1, 3, 0.45, 1.0, 4).unwrap();
        assert!(matches!(
            dual_values(&op, &vec![0.0; op.cells()]),
            Err(CapacityError::ZeroFunction)
        ));
    }
}
