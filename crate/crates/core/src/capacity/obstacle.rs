//! Discretized obstacle problem: minimize
//! `E(h) = (1/(2d)^k) * s^{d-2k} * <h, (-L)^k h>` over grid functions with
//! `h >= 1` on the cube `V = [-1,1]^d`, `h = 0` outside the ball of radius
//! `R` (plus a Dirichlet ring of width `k*s` so every stencil read is
//! defined), where `L` is the unscaled `2d+1`-point Laplacian. Solved by
//! projected gradient with Nesterov momentum and adaptive restart; the step
//! comes from the operator-norm bound `||L|| <= 4d`.

use super::CapacityError;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeClass {
    /// pinned to zero (outside radius R)
    Frozen,
    /// lower bound 1 (inside V)
    Obstacle,
    Free,
}

/// Geometry of the discretization.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    pub k: usize,
    pub d: usize,
    pub h_step: f64,
    pub radius: f64,
    /// nodes per axis (odd, centred at the origin)
    side: usize,
    /// node index bound: coordinates run over [-m, m]
    m: i64,
    classes: Vec<NodeClass>,
}

impl ObstacleProblem {
    /// `h_step` must divide the cube side 2 and the diameter `2R`, and `R`
    /// must exceed `sqrt(d)` so the cube sits strictly inside the ball.
    pub fn new(k: usize, d: usize, h_step: f64, radius: f64) -> Result<Self, CapacityError> {
        let min = (d as f64).sqrt();
        if radius <= min {
            return Err(CapacityError::RadiusTooSmall { r: radius, min });
        }
        for target in [2.0, 2.0 * radius] {
            let ratio = target / h_step;
            if (ratio - ratio.round()).abs() > 1e-9 {
                return Err(CapacityError::StepDoesNotDivide {
                    h: h_step,
                    two_r: 2.0 * radius,
                });
            }
        }
        // Dirichlet ring of width k*h_step beyond the ball
        let m = (radius / h_step).round() as i64 + k as i64;
        let side = (2 * m + 1) as usize;
        let n = side.pow(d as u32);
        let mut classes = vec![NodeClass::Frozen; n];
        let cube_radius = (1.0 / h_step).round() as i64;
        let r2 = radius * radius;
        let mut coords = vec![-m; d];
        for class in classes.iter_mut() {
            let radius2: f64 = coords
                .iter()
                .map(|&c| (c as f64 * h_step) * (c as f64 * h_step))
                .sum();
            if radius2 <= r2 + 1e-12 {
                let in_cube = coords.iter().all(|&c| c.abs() <= cube_radius);
                *class = if in_cube {
                    NodeClass::Obstacle
                } else {
                    NodeClass::Free
                };
            }
            for a in (0..d).rev() {
                coords[a] += 1;
                if coords[a] > m {
                    coords[a] = -m;
                } else {
                    break;
                }
            }
        }
        Ok(Self {
            k,
            d,
            h_step,
            radius,
            side,
            m,
            classes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.classes.len()
    }

    pub fn obstacle_nodes(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| **c == NodeClass::Obstacle)
            .count()
    }

    /// Energy prefactor `s^{d-2k} / (2d)^k` (`q_k`-free).
    fn energy_scale(&self) -> f64 {
        self.h_step.powi(self.d as i32 - 2 * self.k as i32)
            / (2.0 * self.d as f64).powi(self.k as i32)
    }

    /// `out = L^k f` with zero-Dirichlet truncation at the array edge, where
    /// `L` is the unscaled 2d+1-point Laplacian `sum_nb - 2d*id` (so
    /// `(-L)^k = (-1)^k L^k`; the sign cancels in the quadratic form).
    fn lap_power(&self, f: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        out.copy_from_slice(f);
        for _ in 0..self.k {
            self.lap_once(out, scratch);
            out.copy_from_slice(scratch);
        }
        if self.k % 2 == 1 {
            for v in out.iter_mut() {
                *v = -*v;
            }
        }
    }

    /// `out = L f` (unscaled stencil), parallel over leading-axis slabs.
    fn lap_once(&self, f: &[f64], out: &mut [f64]) {
        let side = self.side;
        let d = self.d;
        let n = f.len();
        let slab = n / side;
        let two_d = 2.0 * d as f64;
        out.par_chunks_mut(slab)
            .enumerate()
            .for_each(|(c0, chunk)| {
                let base = c0 * slab;
                // remaining-axis strides within the slab
                let mut coords = vec![0usize; d];
                coords[0] = c0;
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let idx = base + off;
                    let mut rem = off;
                    for a in (1..d).rev() {
                        coords[a] = rem % side;
                        rem /= side;
                    }
                    let mut acc = -two_d * f[idx];
                    let mut stride = 1usize;
                    for a in (0..d).rev() {
                        let c = coords[a];
                        if c + 1 < side {
                            acc += f[idx + stride];
                        }
                        if c > 0 {
                            acc += f[idx - stride];
                        }
                        stride *= side;
                    }
                    *slot = acc;
                }
            });
    }

    fn project(&self, h: &mut [f64]) {
        for (v, class) in h.iter_mut().zip(&self.classes) {
            match class {
                NodeClass::Frozen => *v = 0.0,
                NodeClass::Obstacle => *v = v.max(1.0),
                NodeClass::Free => {}
            }
        }
    }

    /// `grad E = 2 c (-L)^k h`; returns the energy as well.
    fn gradient(&self, h: &[f64], grad: &mut [f64], scratch: &mut [f64]) -> f64 {
        let c = self.energy_scale();
        self.lap_power(h, grad, scratch);
        let mut energy = 0.0;
        for (g, &hv) in grad.iter_mut().zip(h) {
            energy += *g * hv;
            *g *= 2.0 * c;
        }
        c * energy
    }

    /// Norm of the projected-gradient mapping at `h`.
    fn pg_norm(&self, h: &[f64], grad: &[f64], step: f64) -> f64 {
        let mut acc = 0.0;
        for ((&hv, &g), class) in h.iter().zip(grad).zip(&self.classes) {
            let moved = match class {
                NodeClass::Frozen => 0.0,
                NodeClass::Obstacle => (hv - g * step).max(1.0),
                NodeClass::Free => hv - g * step,
            };
            let delta = (hv - moved) / step;
            acc += delta * delta;
        }
        acc.sqrt()
    }

    /// Integer node coordinates for a flat index (grid position times step).
    pub fn node_coords(&self, idx: usize) -> Vec<i64> {
        let mut coords = vec![0i64; self.d];
        let mut rem = idx;
        for a in (0..self.d).rev() {
            coords[a] = (rem % self.side) as i64 - self.m;
            rem /= self.side;
        }
        coords
    }
}

#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    pub value: f64,
    pub h: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub pg_norm: f64,
    pub initial_pg_norm: f64,
}

const PG_TOL: f64 = 1e-8;
const MAX_ITER: usize = 60_000;

/// Minimize the energy by accelerated projected gradient. Returns the
/// (q_k-free) energy value and the minimizer; non-convergence within the
/// iteration cap is flagged with the final residual, not hidden.
pub fn solve_obstacle(problem: &ObstacleProblem) -> ObstacleSolution {
    let n = problem.node_count();
    let step = {
        // Lipschitz bound: 2 c (4d)^k
        let l = 2.0 * problem.energy_scale() * (4.0 * problem.d as f64).powi(problem.k as i32);
        1.0 / l
    };
    let mut h = vec![0.0; n];
    for (v, class) in h.iter_mut().zip(&problem.classes) {
        if *class == NodeClass::Obstacle {
            *v = 1.0;
        }
    }
    let mut y = h.clone();
    let mut grad = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    problem.gradient(&h, &mut grad, &mut scratch);
    let initial_pg_norm = problem.pg_norm(&h, &grad, step);
    let target = PG_TOL * initial_pg_norm.max(1e-300);

    let mut t = 1.0f64;
    let mut pg = initial_pg_norm;
    let mut iterations = 0;
    let mut converged = initial_pg_norm == 0.0;
    while !converged && iterations < MAX_ITER {
        problem.gradient(&y, &mut grad, &mut scratch);
        // h_new = P(y - step*grad), reusing `scratch` for the new iterate
        for ((s, &yv), &g) in scratch.iter_mut().zip(&y).zip(&grad) {
            *s = yv - step * g;
        }
        problem.project(&mut scratch);
        // adaptive restart: if the composite step opposes progress, reset momentum
        let mut restart_dot = 0.0;
        for ((&yv, &hn), &ho) in y.iter().zip(scratch.iter()).zip(&h) {
            restart_dot += (yv - hn) * (hn - ho);
        }
        if restart_dot > 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for ((yv, &hn), &ho) in y.iter_mut().zip(scratch.iter()).zip(&h) {
            *yv = hn + beta * (hn - ho);
        }
        std::mem::swap(&mut h, &mut scratch);
        t = t_next;
        iterations += 1;
        if iterations % 50 == 0 || iterations == MAX_ITER {
            problem.gradient(&h, &mut grad, &mut scratch);
            pg = problem.pg_norm(&h, &grad, step);
            if pg <= target {
                converged = true;
            }
        }
    }
    let value = problem.gradient(&h, &mut grad, &mut scratch);
    ObstacleSolution {
        value,
        h,
        iterations,
        converged,
        pg_norm: pg,
        initial_pg_norm,
    }
}

/// First-order optimality diagnostics at a solution.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// max of `1 - h` over obstacle nodes (exact feasibility is <= 0).
    pub feasibility_violation: f64,
    /// max |grad| off the contact set, relative to the multiplier scale on it.
    pub off_contact_stationarity: f64,
    /// `sum (h - 1) * grad` over obstacle nodes, normalized by the energy.
    pub complementarity: f64,
    /// most negative multiplier on the contact set, relative to scale.
    pub multiplier_negativity: f64,
}

const CONTACT_TOL: f64 = 1e-9;

pub fn kkt_report(problem: &ObstacleProblem, solution: &ObstacleSolution) -> KktReport {
    let n = problem.node_count();
    let mut grad = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    problem.gradient(&solution.h, &mut grad, &mut scratch);
    let mut feasibility: f64 = 0.0;
    let mut multiplier_scale: f64 = 0.0;
    let mut off_contact: f64 = 0.0;
    let mut complementarity = 0.0;
    let mut most_negative: f64 = 0.0;
    for ((&h, &g), class) in solution.h.iter().zip(&grad).zip(&problem.classes) {
        match class {
            NodeClass::Frozen => {}
            NodeClass::Obstacle => {
                feasibility = feasibility.max(1.0 - h);
                if h <= 1.0 + CONTACT_TOL {
                    // lower bound binding: multiplier is +g, must be >= 0
                    multiplier_scale = multiplier_scale.max(g.abs());
                    most_negative = most_negative.max(-g);
                } else {
                    off_contact = off_contact.max(g.abs());
                }
                complementarity += (h - 1.0) * g;
            }
            NodeClass::Free => {
                off_contact = off_contact.max(g.abs());
            }
        }
    }
    let scale = multiplier_scale.max(1e-300);
    KktReport {
        feasibility_violation: feasibility,
        off_contact_stationarity: off_contact / scale,
        complementarity: complementarity.abs() / solution.value.abs().max(1e-300),
        multiplier_negativity: most_negative / scale,
    }
}

/// One obstacle run for extrapolation.
#[derive(Debug, Clone, Copy)]
pub struct ObstacleSample {
    pub h_step: f64,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Extrapolated {
    /// Continuum estimate, absent when extrapolation was refused.
    pub value: Option<f64>,
    pub error_bar: f64,
    pub refused: Option<String>,
    pub raw: Vec<ObstacleSample>,
}

/// Richardson-extrapolate in `h_step` at fixed radius (needs >= 3
/// resolutions), then remove the leading `R^{2k-d}` cutoff correction from a
/// second radius at the finest step. A non-monotone resolution sequence
/// refuses extrapolation and returns the raw values.
pub fn extrapolate_capacity(
    k: usize,
    d: usize,
    samples: &[ObstacleSample],
) -> Result<Extrapolated, CapacityError> {
    // group by radius
    let mut radii: Vec<f64> = samples.iter().map(|s| s.radius).collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    let main_radius = *radii
        .iter()
        .max_by_key(|&&r| samples.iter().filter(|s| s.radius == r).count())
        .ok_or(CapacityError::NotEnoughData {
            need: "at least one radius",
            got: 0,
        })?;
    let mut main: Vec<ObstacleSample> = samples
        .iter()
        .filter(|s| s.radius == main_radius)
        .copied()
        .collect();
    main.sort_by(|a, b| b.h_step.partial_cmp(&a.h_step).unwrap());
    if main.len() < 3 {
        return Err(CapacityError::NotEnoughData {
            need: ">= 3 resolutions at a fixed radius",
            got: main.len(),
        });
    }
    // monotone value sequence under refinement?
    let decreasing = main.windows(2).all(|w| w[1].value <= w[0].value + 1e-12);
    let increasing = main.windows(2).all(|w| w[1].value >= w[0].value - 1e-12);
    if !decreasing && !increasing {
        return Ok(Extrapolated {
            value: None,
            error_bar: f64::NAN,
            refused: Some("value sequence not monotone under refinement".into()),
            raw: samples.to_vec(),
        });
    }
    // fit value = a + b h + c h^2 through the three finest steps
    let fine = &main[main.len() - 3..];
    let (h1, v1) = (fine[0].h_step, fine[0].value);
    let (h2, v2) = (fine[1].h_step, fine[1].value);
    let (h3, v3) = (fine[2].h_step, fine[2].value);
    // Lagrange extrapolation to h = 0
    let a_h = v1 * (h2 * h3) / ((h1 - h2) * (h1 - h3))
        + v2 * (h1 * h3) / ((h2 - h1) * (h2 - h3))
        + v3 * (h1 * h2) / ((h3 - h1) * (h3 - h2));

    // radius correction from a second radius, at the finest step the two
    // radii share (the discretization bias largely cancels in the difference)
    let power = 2.0 * k as f64 - d as f64;
    let mut correction = 0.0;
    'correction: for base in main.iter().rev() {
        for &other_r in radii.iter().filter(|&&r| r != main_radius) {
            if let Some(other) = samples
                .iter()
                .find(|s| s.radius == other_r && (s.h_step - base.h_step).abs() < 1e-12)
            {
                let c_r =
                    (other.value - base.value) / (other_r.powf(power) - main_radius.powf(power));
                correction = c_r * main_radius.powf(power);
                break 'correction;
            }
        }
    }
    let value = a_h - correction;
    let richardson_move = (a_h - main.last().unwrap().value).abs();
    // heuristic bar: half the extrapolation move plus half the cutoff
    // correction (zero when only one radius was supplied)
    let error_bar = 0.5 * richardson_move + 0.5 * correction.abs();
    Ok(Extrapolated {
        value: Some(value),
        error_bar,
        refused: None,
        raw: samples.to_vec(),
    })
}
