//! Lattice geometry, the symbol polynomial `q`, and exact application of the
//! discrete operators: the Laplacian `Delta`, forward gradients, and the
//! precision operator `J = q(eps*I - Delta)`.
//!
//! The Laplacian convention is `(Delta f)(x) = (1/2d) * sum_{|x-y|=1} f(y) - f(x)`
//! with periodic wraparound; `J` is a degree-`K` polynomial in the
//! nearest-neighbour stencil and therefore has range `K` in the l1 metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("polynomial must have a nonzero coefficient list")]
    EmptyPolynomial,
    #[error("minimal degree k must be >= 1 (got {0})")]
    ZeroMinDegree(usize),
    #[error("tightness violated: q_{0} = 0 (k and K must index nonzero coefficients)")]
    LooseCoefficient(usize),
    #[error("gradient axis {axis} out of range for dimension {d}")]
    InvalidAxis { axis: usize, d: usize },
    #[error("field has {got} values but grid holds {want} sites")]
    SiteCountMismatch { got: usize, want: usize },
    #[error("torus side {l} too small for operator range {range}; need L >= 2K+1")]
    SideTooSmall { l: usize, range: usize },
}

/// The coefficient vector `{q_j}` for `k <= j <= K`, defining `q(r) = sum q_j r^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPolynomial {
    /// Coefficients `q_k, q_{k+1}, ..., q_K`.
    coeffs: Vec<f64>,
    /// Minimal degree `k >= 1`.
    min_degree: usize,
}

impl QPolynomial {
    /// Build `q` from its minimal degree and the coefficients `q_k..q_K`.
    /// Leading and trailing coefficients must be nonzero so that `k` and `K`
    /// are tight.
    pub fn new(min_degree: usize, coeffs: Vec<f64>) -> Result<Self, LatticeError> {
        if coeffs.is_empty() {
            return Err(LatticeError::EmptyPolynomial);
        }
        if min_degree == 0 {
            return Err(LatticeError::ZeroMinDegree(min_degree));
        }
        if coeffs[0] == 0.0 {
            return Err(LatticeError::LooseCoefficient(min_degree));
        }
        if *coeffs.last().unwrap() == 0.0 {
            return Err(LatticeError::LooseCoefficient(min_degree + coeffs.len() - 1));
        }
        Ok(Self { coeffs, min_degree })
    }

    /// The free field, `q(r) = r`.
    pub fn free_field() -> Self {
        Self::new(1, vec![1.0]).unwrap()
    }

    /// The membrane model, `q(r) = r^2`.
    pub fn membrane() -> Self {
        Self::new(2, vec![1.0]).unwrap()
    }

    /// The mixed model `q(r) = r + 0.5 r^2`.
    pub fn mixed() -> Self {
        Self::new(1, vec![1.0, 0.5]).unwrap()
    }

    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    pub fn max_degree(&self) -> usize {
        self.min_degree + self.coeffs.len() - 1
    }

    /// Leading low-order coefficient `q_k`.
    pub fn leading_coeff(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficients `q_k..q_K` in degree order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate `q(r)` by Horner's scheme on `r^k * (q_k + q_{k+1} r + ...)`.
    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc * r.powi(self.min_degree as i32)
    }
}

/// A `d`-dimensional torus `Z_L^d` with mass regularization `eps >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub d: usize,
    pub l: usize,
    pub eps: f64,
}

impl TorusGrid {
    pub fn new(d: usize, l: usize, eps: f64) -> Self {
        assert!(d >= 1 && l >= 2, "torus needs d >= 1 and L >= 2");
        assert!(eps >= 0.0 && eps.is_finite());
        Self { d, l, eps }
    }

    pub fn site_count(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    /// The side must satisfy `L >= 2K+1` so a range-K operator does not wrap
    /// onto itself at a single site.
    pub fn check_operator_range(&self, max_degree: usize) -> Result<(), LatticeError> {
        if self.l < 2 * max_degree + 1 {
            return Err(LatticeError::SideTooSmall {
                l: self.l,
                range: max_degree,
            });
        }
        Ok(())
    }

    /// Row-major site index of coordinates in `[0, L)^d`.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        let l = self.l as i64;
        let mut idx = 0usize;
        for &c in coords {
            let c = c.rem_euclid(l);
            idx = idx * self.l + c as usize;
        }
        idx
    }

    /// Coordinates in `[0, L)^d` of a row-major site index.
    pub fn coords_of(&self, mut index: usize) -> Vec<i64> {
        let mut coords = vec![0i64; self.d];
        for a in (0..self.d).rev() {
            coords[a] = (index % self.l) as i64;
            index /= self.l;
        }
        coords
    }

    /// Reduce a displacement component to the representative in `(-L/2, L/2]`.
    pub fn canonical_component(&self, c: i64) -> i64 {
        let l = self.l as i64;
        let r = c.rem_euclid(l);
        if 2 * r > l {
            r - l
        } else {
            r
        }
    }

    /// Reduce a displacement to the canonical representative in `(-L/2, L/2]^d`.
    pub fn canonical_displacement(&self, v: &[i64]) -> Vec<i64> {
        v.iter().map(|&c| self.canonical_component(c)).collect()
    }
}

/// Real values on the torus, row-major over `[0, L)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.site_count()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.site_count()],
        }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self, LatticeError> {
        if values.len() != grid.site_count() {
            return Err(LatticeError::SiteCountMismatch {
                got: values.len(),
                want: grid.site_count(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Unit spike at the given coordinates.
    pub fn spike(grid: TorusGrid, coords: &[i64]) -> Self {
        let mut f = Self::zeros(grid);
        let idx = grid.index_of(coords);
        f.values[idx] = 1.0;
        f
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn value_at(&self, coords: &[i64]) -> f64 {
        self.values[self.grid.index_of(coords)]
    }
}

/// Axis strides for row-major indexing on the torus.
pub(crate) fn strides(grid: &TorusGrid) -> Vec<usize> {
    let mut s = vec![1usize; grid.d];
    for a in (0..grid.d.saturating_sub(1)).rev() {
        s[a] = s[a + 1] * grid.l;
    }
    s
}

/// Apply the discrete Laplacian `(Delta f)(x) = (1/2d) sum_{nb} f(y) - f(x)`.
pub fn laplacian_apply(f: &LatticeField) -> LatticeField {
    let mut out = LatticeField::zeros(f.grid);
    laplacian_into(f.grid, &f.values, &mut out.values);
    out
}

pub(crate) fn laplacian_into(grid: TorusGrid, f: &[f64], out: &mut [f64]) {
    let l = grid.l;
    let d = grid.d;
    let inv2d = 1.0 / (2.0 * d as f64);
    let strides = strides(&grid);
    let n = grid.site_count();
    // Walk sites in row-major order, maintaining coordinates incrementally.
    let mut coords = vec![0usize; d];
    for idx in 0..n {
        let mut acc = 0.0;
        for a in 0..d {
            let s = strides[a];
            let c = coords[a];
            let up = if c + 1 == l { idx + s - s * l } else { idx + s };
            let dn = if c == 0 { idx + s * l - s } else { idx - s };
            acc += f[up] + f[dn];
        }
        out[idx] = inv2d * acc - f[idx];
        // increment mixed-radix coordinate counter
        for a in (0..d).rev() {
            coords[a] += 1;
            if coords[a] == l {
                coords[a] = 0;
            } else {
                break;
            }
        }
    }
}

/// Forward difference along `axis` (1-based): `(grad_i f)(x) = f(x+e_i) - f(x)`.
pub fn gradient_apply(f: &LatticeField, axis: usize) -> Result<LatticeField, LatticeError> {
    let d = f.grid.d;
    if axis == 0 || axis > d {
        return Err(LatticeError::InvalidAxis { axis, d });
    }
    let a = axis - 1;
    let l = f.grid.l;
    let strides = strides(&f.grid);
    let s = strides[a];
    let mut out = LatticeField::zeros(f.grid);
    let n = f.grid.site_count();
    for idx in 0..n {
        let c = (idx / s) % l;
        let up = if c + 1 == l { idx + s - s * l } else { idx + s };
        out.values[idx] = f.values[up] - f.values[idx];
    }
    Ok(out)
}

/// Apply `J = q(eps*I - Delta)` by Horner recombination; exactly `K`
/// applications of the Laplacian stencil.
pub fn j_apply(q: &QPolynomial, eps: f64, f: &LatticeField) -> LatticeField {
    let grid = f.grid;
    let mut out = LatticeField::zeros(grid);
    let mut scratch = vec![0.0; grid.site_count()];
    j_apply_into(q, eps, grid, &f.values, &mut out.values, &mut scratch);
    out
}

/// In-place form of [`j_apply`]: `out = q(eps*I - Delta) f`, with `scratch`
/// reused between calls.
pub(crate) fn j_apply_into(
    q: &QPolynomial,
    eps: f64,
    grid: TorusGrid,
    f: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) {
    let coeffs = q.coeffs();
    let k = q.min_degree();
    // inner = q_K f; inner = A*inner + q_j f for j = K-1..k, with A = eps*I - Delta
    let top = *coeffs.last().unwrap();
    for (o, &fi) in out.iter_mut().zip(f) {
        *o = top * fi;
    }
    for &c in coeffs.iter().rev().skip(1) {
        apply_a_into(grid, eps, out, scratch);
        for (o, (&s, &fi)) in out.iter_mut().zip(scratch.iter().zip(f)) {
            *o = s + c * fi;
        }
    }
    // result = A^k * inner
    for _ in 0..k {
        apply_a_into(grid, eps, out, scratch);
        out.copy_from_slice(scratch);
    }
}

/// `out = (eps*I - Delta) f`.
fn apply_a_into(grid: TorusGrid, eps: f64, f: &[f64], out: &mut [f64]) {
    laplacian_into(grid, f, out);
    for (o, &fi) in out.iter_mut().zip(f) {
        *o = eps * fi - *o;
    }
}

/// The Hamiltonian quadratic form `H(phi) = <phi, q(-Delta) phi>`, evaluated
/// term by term: even degrees contribute `sum_x ((-Delta)^{j/2} phi)^2`, odd
/// degrees `(1/2d) sum_i sum_x ((-Delta)^{(j-1)/2} grad_i phi)^2`. The `1/2d`
/// weight matches the Laplacian normalization, so the telescoped form agrees
/// with `<phi, j_apply(q, 0, phi)>` identically.
pub fn hamiltonian_energy(q: &QPolynomial, f: &LatticeField) -> f64 {
    let grid = f.grid;
    let inv2d = 1.0 / (2.0 * grid.d as f64);
    let mut total = 0.0;
    // power = (-Delta)^m f, maintained incrementally over degrees
    let mut power = f.clone();
    let mut m = 0usize;
    for (offset, &c) in q.coeffs().iter().enumerate() {
        let j = q.min_degree() + offset;
        if c == 0.0 {
            continue;
        }
        let half = j / 2;
        while m < half {
            let lap = laplacian_apply(&power);
            for (p, &l) in power.values.iter_mut().zip(&lap.values) {
                *p = -l;
            }
            m += 1;
        }
        if j.is_multiple_of(2) {
            total += c * power.dot(&power);
        } else {
            let mut grad_sq = 0.0;
            for axis in 1..=grid.d {
                let g = gradient_apply(&power, axis).expect("axis in range");
                grad_sq += g.dot(&g);
            }
            total += c * inv2d * grad_sq;
        }
    }
    total
}

/// A model `(q, d)`; the dimension must dominate the minimal degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub q: QPolynomial,
    pub d: usize,
}

impl ModelSpec {
    pub fn new(q: QPolynomial, d: usize) -> Self {
        Self { q, d }
    }
}

/// Which model requirement a validation finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelRequirement {
    /// `d >= 2k + 1`.
    DimensionBound,
    /// `q(r) > 0` for all `r` in `(0, 2]`.
    SymbolPositivity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub requirement: ModelRequirement,
    /// Witness value of `r` for positivity failures.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dimension_ok: bool,
    pub positivity_ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const POSITIVITY_GRID_POINTS: usize = 120_000;
const POSITIVITY_DELTA: f64 = 1e-8;

/// Check the model requirements: the dimension bound `d >= 2k+1` and the
/// positivity of `q` on `(0, 2]`. Positivity is checked on a dense grid AND
/// through root isolation of `q(r)/r^k` on `[1e-8, 2]`, so a sign dip between
/// grid points cannot be missed.
#[allow(clippy::int_plus_one)] // written as the stated bound d >= 2k + 1
pub fn validate_model(m: &ModelSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let k = m.q.min_degree();
    let dimension_ok = m.d >= 2 * k + 1;
    if !dimension_ok {
        violations.push(Violation {
            requirement: ModelRequirement::DimensionBound,
            witness: None,
            detail: format!("d = {} but 2k+1 = {}", m.d, 2 * k + 1),
        });
    }

    let mut positivity_ok = true;
    let mut first_dip: Option<(f64, f64)> = None;
    for i in 1..=POSITIVITY_GRID_POINTS {
        let r = 2.0 * (i as f64) / (POSITIVITY_GRID_POINTS as f64);
        let v = m.q.eval(r);
        if v <= 0.0 {
            first_dip = Some((r, v));
            break;
        }
    }
    if let Some((r, v)) = first_dip {
        positivity_ok = false;
        violations.push(Violation {
            requirement: ModelRequirement::SymbolPositivity,
            witness: Some(r),
            detail: format!("q({r}) = {v} <= 0 (grid scan)"),
        });
    } else {
        // Grid is clean; rule out dips between grid points by isolating the
        // real roots of the reduced polynomial q(r)/r^k on [delta, 2].
        for root in reduced_real_roots(&m.q) {
            if (POSITIVITY_DELTA..=2.0).contains(&root) {
                positivity_ok = false;
                violations.push(Violation {
                    requirement: ModelRequirement::SymbolPositivity,
                    witness: Some(root),
                    detail: format!("q(r)/r^k has a real root at r = {root}"),
                });
            }
        }
    }

    ValidationReport {
        dimension_ok,
        positivity_ok,
        violations,
    }
}

/// Real roots of the reduced polynomial `q(r)/r^k = q_k + q_{k+1} r + ...`,
/// found as eigenvalues of the companion matrix and polished by bisection.
fn reduced_real_roots(q: &QPolynomial) -> Vec<f64> {
    let coeffs = q.coeffs();
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let n = deg;
    let mut companion = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eigen = companion.complex_eigenvalues();
    let mut roots: Vec<f64> = eigen
        .iter()
        .filter(|z| z.im.abs() < 1e-9 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    // Polish each candidate by a short bisection around it when a bracketing
    // sign change exists; otherwise keep the eigenvalue estimate.
    let reduced = |r: f64| -> f64 {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc
    };
    for r in roots.iter_mut() {
        let (mut a, mut b) = (*r - 1e-6, *r + 1e-6);
        if reduced(a) * reduced(b) < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if reduced(a) * reduced(mid) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            *r = 0.5 * (a + b);
        }
    }
    roots
}
