//! Conditional Gaussian laws on boxes with range-`K` boundaries, the
//! single-site resampling kernel, Gibbs dynamics (free and hard-wall), and
//! Markov-property verification.
//!
//! A box of side `L_box` around a centre consists of the interior
//! `B = {y : max_i |y_i - c_i| < (L_box - K)/2}` and the boundary shell
//! `dB = {y : max_i |y_i - c_i| in [(L_box - K)/2, (L_box + K)/2]}`. Because
//! `J` has range `K`, the shell screens the interior from everything outside,
//! so the conditional law of the interior given the exterior depends on the
//! shell values only: the mean solves `J_BB m = -J_{B,dB} phi_dB` and the
//! centre variance is the `(c,c)` entry of `J_BB^{-1}`.

mod gibbs;
mod markov;

pub use gibbs::{
    gibbs_sweep, sample_lower_truncated_normal, truncated_gibbs_sweep, ChainCheckpoint,
    GibbsChain, PositivityRegion,
};
pub use markov::{
    conditional_center_coefficients, dense_schur_mean, markov_check, MarkovReport,
};

use crate::lattice::{QPolynomial, TorusGrid};
use crate::solve::conjugate_gradient;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConditionalError {
    #[error("box side {l_box} must exceed K + 1 (K = {k})")]
    BoxTooSmall { l_box: usize, k: usize },
    #[error("box side {l_box} minus range {k} must be even")]
    ParityViolation { l_box: usize, k: usize },
    #[error("boundary data has {got} values, shell has {want} sites")]
    BoundaryCountMismatch { got: usize, want: usize },
    #[error("torus side {l} cannot hold a box patch of side {patch}")]
    PatchDoesNotFit { l: usize, patch: usize },
    #[error("interior solve did not converge: relative residual {0}")]
    SolveFailed(f64),
    #[error("region of half-side {n} needs torus side >= {need} for a K+1 margin (got {l})")]
    RegionDoesNotFit { n: usize, need: usize, l: usize },
    #[error("field violates positivity on the constrained region at site index {0}")]
    PositivityViolated(usize),
}

/// A box `B` with its range-`K` boundary shell, stored as offsets from the
/// centre.
#[derive(Debug, Clone)]
pub struct BoxGeometry {
    pub center: Vec<i64>,
    pub l_box: usize,
    pub range_k: usize,
    pub interior: Vec<Vec<i64>>,
    pub boundary: Vec<Vec<i64>>,
}

impl BoxGeometry {
    /// Build the box; `l_box > K+1` and `l_box - K` even are required so the
    /// interior/shell radii are integers and the interior is nonempty.
    pub fn new(center: Vec<i64>, l_box: usize, range_k: usize) -> Result<Self, ConditionalError> {
        if l_box <= range_k + 1 {
            return Err(ConditionalError::BoxTooSmall {
                l_box,
                k: range_k,
            });
        }
        if !(l_box - range_k).is_multiple_of(2) {
            return Err(ConditionalError::ParityViolation {
                l_box,
                k: range_k,
            });
        }
        let d = center.len();
        let inner = ((l_box - range_k) / 2) as i64;
        let outer = ((l_box + range_k) / 2) as i64;
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let side = 2 * outer + 1;
        let mut offset = vec![-outer; d];
        for _ in 0..(side as usize).pow(d as u32) {
            let sup = offset.iter().map(|c| c.abs()).max().unwrap();
            if sup < inner {
                interior.push(offset.clone());
            } else {
                boundary.push(offset.clone());
            }
            for a in (0..d).rev() {
                offset[a] += 1;
                if offset[a] > outer {
                    offset[a] = -outer;
                } else {
                    break;
                }
            }
        }
        Ok(Self {
            center,
            l_box,
            range_k,
            interior,
            boundary,
        })
    }

    pub fn d(&self) -> usize {
        self.center.len()
    }

    /// Sup-norm radius below which sites are interior.
    pub fn inner_radius(&self) -> i64 {
        ((self.l_box - self.range_k) / 2) as i64
    }

    /// Sup-norm radius of the outer shell edge.
    pub fn outer_radius(&self) -> i64 {
        ((self.l_box + self.range_k) / 2) as i64
    }
}

/// The conditional law of the interior spins given boundary data: the mean
/// field, and the variance of the centre spin (which is boundary-independent).
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    pub geometry: BoxGeometry,
    /// Mean per interior site, ordered as `geometry.interior`.
    pub mean: Vec<f64>,
    /// Conditional variance of the centre spin.
    pub center_variance: f64,
}

/// A cubic patch `[-half, half]^d` with zero-Dirichlet values beyond it; the
/// working set for box solves. The patch equals interior plus shell, and all
/// interior reads sit further than the operator range from the patch faces,
/// so the truncation never contaminates them.
struct Patch {
    d: usize,
    half: i64,
    side: usize,
}

impl Patch {
    fn new(d: usize, half: i64) -> Self {
        Self {
            d,
            half,
            side: (2 * half + 1) as usize,
        }
    }

    fn len(&self) -> usize {
        self.side.pow(self.d as u32)
    }

    fn index(&self, offset: &[i64]) -> usize {
        let mut idx = 0usize;
        for &c in offset {
            debug_assert!(c.abs() <= self.half);
            idx = idx * self.side + (c + self.half) as usize;
        }
        idx
    }

    /// `out = (eps*I - Delta) f` with zero-Dirichlet outside the patch.
    fn apply_a(&self, eps: f64, f: &[f64], out: &mut [f64]) {
        let side = self.side;
        let d = self.d;
        let inv2d = 1.0 / (2.0 * d as f64);
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * side;
        }
        let n = self.len();
        let mut coords = vec![0usize; d];
        for idx in 0..n {
            let mut acc = 0.0;
            for a in 0..d {
                let s = strides[a];
                let c = coords[a];
                if c + 1 < side {
                    acc += f[idx + s];
                }
                if c > 0 {
                    acc += f[idx - s];
                }
            }
            out[idx] = (1.0 + eps) * f[idx] - inv2d * acc;
            for a in (0..d).rev() {
                coords[a] += 1;
                if coords[a] == side {
                    coords[a] = 0;
                } else {
                    break;
                }
            }
        }
    }

    /// `out = q(eps*I - Delta) f` on the patch by Horner recombination.
    fn apply_j(&self, q: &QPolynomial, eps: f64, f: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let coeffs = q.coeffs();
        let top = *coeffs.last().unwrap();
        for (o, &fi) in out.iter_mut().zip(f) {
            *o = top * fi;
        }
        for &c in coeffs.iter().rev().skip(1) {
            self.apply_a(eps, out, scratch);
            for (o, (&s, &fi)) in out.iter_mut().zip(scratch.iter().zip(f)) {
                *o = s + c * fi;
            }
        }
        for _ in 0..q.min_degree() {
            self.apply_a(eps, out, scratch);
            out.copy_from_slice(scratch);
        }
    }
}

const CG_TOL: f64 = 1e-12;

/// Solve the interior system `J_BB u = rhs` on the patch (rhs given per
/// interior site, in `geometry.interior` order).
fn solve_interior(
    q: &QPolynomial,
    eps: f64,
    geometry: &BoxGeometry,
    rhs: &[f64],
) -> Result<Vec<f64>, ConditionalError> {
    let patch = Patch::new(geometry.d(), geometry.outer_radius());
    let interior_idx: Vec<usize> = geometry.interior.iter().map(|o| patch.index(o)).collect();
    let n = interior_idx.len();
    let patch_len = patch.len();
    let apply = |v: &[f64], out: &mut [f64]| {
        let mut full = vec![0.0; patch_len];
        let mut result = vec![0.0; patch_len];
        let mut scratch = vec![0.0; patch_len];
        for (i, &pi) in interior_idx.iter().enumerate() {
            full[pi] = v[i];
        }
        patch.apply_j(q, eps, &full, &mut result, &mut scratch);
        for (i, &pi) in interior_idx.iter().enumerate() {
            out[i] = result[pi];
        }
    };
    let mut u = vec![0.0; n];
    let max_iter = 200 + 40 * (n as f64).sqrt() as usize * (1 << q.max_degree());
    let res = conjugate_gradient(apply, rhs, &mut u, CG_TOL, max_iter);
    if !res.converged {
        return Err(ConditionalError::SolveFailed(res.relative_residual));
    }
    Ok(u)
}

/// Conditional law of the interior given boundary data (ordered as
/// `geometry.boundary`); `grid` supplies the mass `eps` and checks that the
/// patch does not wrap on the torus.
pub fn conditional_law(
    q: &QPolynomial,
    grid: TorusGrid,
    geometry: &BoxGeometry,
    boundary_values: &[f64],
) -> Result<ConditionalLaw, ConditionalError> {
    if boundary_values.len() != geometry.boundary.len() {
        return Err(ConditionalError::BoundaryCountMismatch {
            got: boundary_values.len(),
            want: geometry.boundary.len(),
        });
    }
    let patch_side = 2 * geometry.outer_radius() as usize + 1;
    if grid.l < patch_side {
        return Err(ConditionalError::PatchDoesNotFit {
            l: grid.l,
            patch: patch_side,
        });
    }
    let patch = Patch::new(geometry.d(), geometry.outer_radius());
    let patch_len = patch.len();

    // rhs = -J_{B,dB} phi_dB: apply J to the boundary-supported field and
    // restrict to the interior.
    let mut shell = vec![0.0; patch_len];
    for (offset, &v) in geometry.boundary.iter().zip(boundary_values) {
        shell[patch.index(offset)] = v;
    }
    let mut j_shell = vec![0.0; patch_len];
    let mut scratch = vec![0.0; patch_len];
    patch.apply_j(q, grid.eps, &shell, &mut j_shell, &mut scratch);
    let rhs: Vec<f64> = geometry
        .interior
        .iter()
        .map(|o| -j_shell[patch.index(o)])
        .collect();
    let mean = solve_interior(q, grid.eps, geometry, &rhs)?;

    // centre variance: (J_BB^{-1})(c, c)
    let center_pos = geometry
        .interior
        .iter()
        .position(|o| o.iter().all(|&c| c == 0))
        .expect("centre is interior");
    let mut spike = vec![0.0; geometry.interior.len()];
    spike[center_pos] = 1.0;
    let u = solve_interior(q, grid.eps, geometry, &spike)?;
    Ok(ConditionalLaw {
        geometry: geometry.clone(),
        mean,
        center_variance: u[center_pos],
    })
}

/// One point of the conditional-variance curve.
#[derive(Debug, Clone, Copy)]
pub struct GlPoint {
    pub l_box: usize,
    pub g_l: f64,
}

/// Conditional variance `G_L` of the centre spin for each box side, with the
/// field beyond the shell pinned to zero (equivalently removed: by the range
/// property only the shell matters) and mass zero. `G_L` increases towards
/// the infinite-lattice variance.
pub fn g_l_curve(
    q: &QPolynomial,
    d: usize,
    l_boxes: &[usize],
) -> Result<Vec<GlPoint>, ConditionalError> {
    let k = q.max_degree();
    let mut out = Vec::with_capacity(l_boxes.len());
    for &l_box in l_boxes {
        let geometry = BoxGeometry::new(vec![0; d], l_box, k)?;
        let center_pos = geometry
            .interior
            .iter()
            .position(|o| o.iter().all(|&c| c == 0))
            .unwrap();
        let mut spike = vec![0.0; geometry.interior.len()];
        spike[center_pos] = 1.0;
        let u = solve_interior(q, 0.0, &geometry, &spike)?;
        out.push(GlPoint {
            l_box,
            g_l: u[center_pos],
        });
    }
    Ok(out)
}

/// Shell coefficients of the centre conditional mean: with `u` solving
/// `J_BB u = e_c`, the mean given shell data is `m_c = sum_y w_y phi_y` with
/// `w_y = -(J u)(y)` on the shell. One interior solve per geometry; the dot
/// product is then cheap enough to evaluate per Monte Carlo sample.
pub fn center_coefficients(
    q: &QPolynomial,
    grid: TorusGrid,
    geometry: &BoxGeometry,
) -> Result<Vec<(Vec<i64>, f64)>, ConditionalError> {
    let center_pos = geometry
        .interior
        .iter()
        .position(|o| o.iter().all(|&c| c == 0))
        .expect("centre is interior");
    let mut spike = vec![0.0; geometry.interior.len()];
    spike[center_pos] = 1.0;
    let u = solve_interior(q, grid.eps, geometry, &spike)?;
    let patch = Patch::new(geometry.d(), geometry.outer_radius());
    let mut full = vec![0.0; patch.len()];
    for (offset, &v) in geometry.interior.iter().zip(&u) {
        full[patch.index(offset)] = v;
    }
    let mut j_full = vec![0.0; patch.len()];
    let mut scratch = vec![0.0; patch.len()];
    patch.apply_j(q, grid.eps, &full, &mut j_full, &mut scratch);
    Ok(geometry
        .boundary
        .iter()
        .map(|offset| (offset.clone(), -j_full[patch.index(offset)]))
        .collect())
}

/// The row of `J` around a site: offsets within l1 range `K` and their
/// weights, generated by applying `J` to a spike on a private patch.
#[derive(Debug, Clone)]
pub struct JRow {
    pub diagonal: f64,
    /// Off-centre entries: (offset, weight), weight nonzero.
    pub neighbors: Vec<(Vec<i64>, f64)>,
}

impl JRow {
    pub fn compute(q: &QPolynomial, eps: f64, d: usize) -> Self {
        let k = q.max_degree() as i64;
        let patch = Patch::new(d, k);
        let n = patch.len();
        let mut spike = vec![0.0; n];
        spike[patch.index(&vec![0; d])] = 1.0;
        let mut row = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        patch.apply_j(q, eps, &spike, &mut row, &mut scratch);
        let mut diagonal = 0.0;
        let mut neighbors = Vec::new();
        let mut offset = vec![-k; d];
        for &v in row.iter() {
            if offset.iter().all(|&c| c == 0) {
                diagonal = v;
            } else if v != 0.0 {
                neighbors.push((offset.clone(), v));
            }
            for a in (0..d).rev() {
                offset[a] += 1;
                if offset[a] > k {
                    offset[a] = -k;
                } else {
                    break;
                }
            }
        }
        Self { diagonal, neighbors }
    }
}

/// Single-site conditional law: variance `1/J(0,0)` and mean
/// `-(1/J(0,0)) sum_{y != x} J(x,y) phi_y`, with `eps` taken from the field's
/// grid.
pub fn single_site_law(q: &QPolynomial, phi: &crate::lattice::LatticeField, x: &[i64]) -> (f64, f64) {
    let row = JRow::compute(q, phi.grid.eps, phi.grid.d);
    let mean = single_site_mean(&row, phi, x);
    (mean, 1.0 / row.diagonal)
}

pub(crate) fn single_site_mean(
    row: &JRow,
    phi: &crate::lattice::LatticeField,
    x: &[i64],
) -> f64 {
    let grid = phi.grid;
    let mut acc = 0.0;
    let mut site = vec![0i64; grid.d];
    for (offset, w) in &row.neighbors {
        for (s, (&xi, &oi)) in site.iter_mut().zip(x.iter().zip(offset)) {
            *s = xi + oi;
        }
        acc += w * phi.values[grid.index_of(&site)];
    }
    -acc / row.diagonal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeField;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn box_geometry_k1_l3() {
        let g = BoxGeometry::new(vec![0, 0], 3, 1).unwrap();
        assert_eq!(g.interior, vec![vec![0, 0]]);
        // shell radii 1..=2 in sup norm: 5^2 - 1 = 24 sites
        assert_eq!(g.boundary.len(), 24);
        assert!(g
            .boundary
            .iter()
            .all(|o| (1..=2).contains(&o.iter().map(|c| c.abs()).max().unwrap())));
    }

    #[test]
    fn box_geometry_k2_l4() {
        let g = BoxGeometry::new(vec![0, 0, 0], 4, 2).unwrap();
        assert_eq!(g.interior, vec![vec![0, 0, 0]]);
        assert_eq!(g.boundary.len(), 7usize.pow(3) - 1);
    }

    #[test]
    fn box_geometry_rejects_bad_parity_and_size() {
        assert!(matches!(
            BoxGeometry::new(vec![0, 0], 4, 1),
            Err(ConditionalError::ParityViolation { .. })
        ));
        assert!(matches!(
            BoxGeometry::new(vec![0, 0], 2, 1),
            Err(ConditionalError::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn separation_property() {
        // every site within l1 distance K of the interior is in the patch
        let g = BoxGeometry::new(vec![0, 0], 8, 2).unwrap();
        let outer = g.outer_radius();
        for o in &g.interior {
            // l1 ball of radius K around an interior site stays within sup
            // radius outer
            let sup = o.iter().map(|c| c.abs()).max().unwrap();
            assert!(sup + g.range_k as i64 <= outer);
        }
    }

    #[test]
    fn zero_boundary_gives_zero_mean() {
        let grid = TorusGrid::new(2, 16, 0.0);
        let q = QPolynomial::membrane();
        let g = BoxGeometry::new(vec![0, 0], 8, 2).unwrap();
        let law = conditional_law(&q, grid, &g, &vec![0.0; g.boundary.len()]).unwrap();
        assert!(law.mean.iter().all(|&m| m.abs() < 1e-14));
        assert!(law.center_variance > 0.0);
    }

    #[test]
    fn free_field_k1_l3_is_neighbor_average() {
        let grid = TorusGrid::new(3, 8, 0.0);
        let q = QPolynomial::free_field();
        let g = BoxGeometry::new(vec![0, 0, 0], 3, 1).unwrap();
        let mut rng = stream(5, "cond-test", 0);
        let boundary: Vec<f64> = (0..g.boundary.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let law = conditional_law(&q, grid, &g, &boundary).unwrap();
        // mean at the centre must be the average of the 2d nearest neighbors
        let mut avg = 0.0;
        for (offset, &v) in g.boundary.iter().zip(&boundary) {
            if offset.iter().map(|c| c.abs()).sum::<i64>() == 1 {
                avg += v;
            }
        }
        avg /= 6.0;
        assert!((law.mean[0] - avg).abs() < 1e-10);
        assert!((law.center_variance - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mean_is_linear_in_boundary_data() {
        let grid = TorusGrid::new(2, 16, 0.1);
        let q = QPolynomial::mixed();
        let g = BoxGeometry::new(vec![0, 0], 7, 3).unwrap();
        let mut rng = stream(6, "cond-lin", 0);
        let b1: Vec<f64> = (0..g.boundary.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b2: Vec<f64> = (0..g.boundary.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sum: Vec<f64> = b1.iter().zip(&b2).map(|(a, b)| 2.0 * a + b).collect();
        let l1 = conditional_law(&q, grid, &g, &b1).unwrap();
        let l2 = conditional_law(&q, grid, &g, &b2).unwrap();
        let ls = conditional_law(&q, grid, &g, &sum).unwrap();
        for ((a, b), s) in l1.mean.iter().zip(&l2.mean).zip(&ls.mean) {
            assert!((2.0 * a + b - s).abs() < 1e-9);
        }
        // variance independent of data
        assert!((l1.center_variance - ls.center_variance).abs() < 1e-12);
    }

    #[test]
    fn g_l_single_site_free_field_is_one() {
        let pts = g_l_curve(&QPolynomial::free_field(), 3, &[3]).unwrap();
        assert!((pts[0].g_l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g_l_increases_toward_infinite_variance() {
        let pts = g_l_curve(&QPolynomial::free_field(), 3, &[3, 5, 7, 9, 11]).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].g_l > w[0].g_l, "{pts:?}");
        }
        // bounded by the infinite-lattice variance
        assert!(pts.last().unwrap().g_l < 1.5163860591);
        assert!(pts.iter().all(|p| p.g_l > 0.0));
    }

    #[test]
    fn j_row_free_field() {
        let row = JRow::compute(&QPolynomial::free_field(), 0.0, 3);
        assert!((row.diagonal - 1.0).abs() < 1e-15);
        assert_eq!(row.neighbors.len(), 6);
        for (_, w) in &row.neighbors {
            assert!((w + 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_site_law_free_field() {
        let grid = TorusGrid::new(3, 6, 0.0);
        let mut rng = stream(7, "sslaw", 0);
        let values: Vec<f64> = (0..grid.site_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = LatticeField::from_values(grid, values).unwrap();
        let x = [2i64, 3, 1];
        let (mean, var) = single_site_law(&QPolynomial::free_field(), &phi, &x);
        assert!((var - 1.0).abs() < 1e-14);
        let mut avg = 0.0;
        for a in 0..3 {
            for s in [-1i64, 1] {
                let mut y = x;
                y[a] += s;
                avg += phi.value_at(&y);
            }
        }
        avg /= 6.0;
        assert!((mean - avg).abs() < 1e-12);
    }

    #[test]
    fn single_site_constant_field_is_fixed_point_at_zero_mass() {
        let grid = TorusGrid::new(3, 6, 0.0);
        let phi = LatticeField::constant(grid, 2.5);
        let (mean, _) = single_site_law(&QPolynomial::mixed(), &phi, &[0, 0, 0]);
        // row sums of J are q(eps) = 0 at eps = 0, so the mean reproduces c
        assert!((mean - 2.5).abs() < 1e-12);
    }

    #[test]
    fn gauss_seidel_iteration_converges_to_conditional_mean() {
        // iterating single-site means over the interior is a fixed-point
        // scheme whose limit must be the joint conditional mean
        let grid = TorusGrid::new(2, 16, 0.0);
        let q = QPolynomial::membrane();
        let g = BoxGeometry::new(vec![0, 0], 8, 2).unwrap();
        let mut rng = stream(8, "gs", 0);
        let boundary: Vec<f64> = (0..g.boundary.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let law = conditional_law(&q, grid, &g, &boundary).unwrap();

        // Gauss-Seidel on the patch
        let patch = Patch::new(2, g.outer_radius());
        let mut field = vec![0.0; patch.len()];
        for (o, &v) in g.boundary.iter().zip(&boundary) {
            field[patch.index(o)] = v;
        }
        let row = JRow::compute(&q, 0.0, 2);
        for _ in 0..4000 {
            for o in &g.interior {
                let mut acc = 0.0;
                for (offset, w) in &row.neighbors {
                    let y: Vec<i64> = o.iter().zip(offset).map(|(&a, &b)| a + b).collect();
                    if y.iter().map(|c| c.abs()).max().unwrap() <= g.outer_radius() {
                        acc += w * field[patch.index(&y)];
                    }
                }
                field[patch.index(o)] = -acc / row.diagonal;
            }
        }
        let mut worst = 0.0f64;
        for (o, &m) in g.interior.iter().zip(&law.mean) {
            worst = worst.max((field[patch.index(o)] - m).abs());
        }
        assert!(worst < 1e-8, "sup-norm gap {worst}");
    }
}
