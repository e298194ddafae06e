//! Matrix-free conjugate gradient for symmetric positive-definite operators.

/// Outcome of a CG solve.
#[derive(Debug, Clone)]
pub struct CgResult {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solve `A x = b` for SPD `A` given as `apply(v, out)`, starting from `x = 0`.
/// Stops when `||r|| <= tol_rel * ||b||` or at `max_iter`.
pub fn conjugate_gradient<F>(
    mut apply: F,
    b: &[f64],
    x: &mut [f64],
    tol_rel: f64,
    max_iter: usize,
) -> CgResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    x.fill(0.0);
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm_sq: f64 = b.iter().map(|v| v * v).sum();
    if b_norm_sq == 0.0 {
        return CgResult {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let tol_sq = tol_rel * tol_rel * b_norm_sq;
    let mut rs_old: f64 = b_norm_sq;
    for iter in 0..max_iter {
        if rs_old <= tol_sq {
            return CgResult {
                iterations: iter,
                relative_residual: (rs_old / b_norm_sq).sqrt(),
                converged: true,
            };
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            // not SPD (or fully converged in exact arithmetic)
            break;
        }
        let alpha = rs_old / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    CgResult {
        iterations: max_iter,
        relative_residual: (rs_old / b_norm_sq).sqrt(),
        converged: rs_old <= tol_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_diagonal_system() {
        let diag = [2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 6.0, 12.0, 20.0];
        let mut x = [0.0; 4];
        let res = conjugate_gradient(
            |v, out| {
                for i in 0..4 {
                    out[i] = diag[i] * v[i];
                }
            },
            &b,
            &mut x,
            1e-12,
            100,
        );
        assert!(res.converged);
        for (xi, want) in x.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((xi - want).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let b = [0.0; 3];
        let mut x = [1.0; 3];
        let res = conjugate_gradient(|v, out| out.copy_from_slice(v), &b, &mut x, 1e-12, 10);
        assert!(res.converged);
        assert_eq!(x, [0.0; 3]);
    }
}
