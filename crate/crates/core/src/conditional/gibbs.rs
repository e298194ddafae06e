//! Single-site Gibbs dynamics for the field, free or constrained to stay
//! nonnegative on a region (the hard-wall chain), with deterministic
//! per-sweep random streams so checkpointed runs resume exactly.

use super::{single_site_mean, ConditionalError, JRow};
use crate::lattice::{LatticeField, QPolynomial, TorusGrid};
use crate::rng::stream;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// The sites `V_N = {x : max_i |x_i| <= N}` embedded in a torus with margin
/// at least `K + 1` on every side, so the wall never interacts with the
/// wraparound.
#[derive(Debug, Clone)]
pub struct PositivityRegion {
    pub grid: TorusGrid,
    pub n_half: usize,
    /// per-site flag, row-major over the torus
    pub mask: Vec<bool>,
    /// site indices of the region
    pub sites: Vec<usize>,
}

impl PositivityRegion {
    pub fn new(grid: TorusGrid, n_half: usize, range_k: usize) -> Result<Self, ConditionalError> {
        let need = 2 * n_half + 1 + 2 * (range_k + 1);
        if grid.l < need {
            return Err(ConditionalError::RegionDoesNotFit {
                n: n_half,
                need,
                l: grid.l,
            });
        }
        let mut mask = vec![false; grid.site_count()];
        let mut sites = Vec::new();
        for (idx, flag) in mask.iter_mut().enumerate() {
            let coords = grid.coords_of(idx);
            let sup = coords
                .iter()
                .map(|&c| grid.canonical_component(c).abs())
                .max()
                .unwrap();
            if sup <= n_half as i64 {
                *flag = true;
                sites.push(idx);
            }
        }
        Ok(Self {
            grid,
            n_half,
            mask,
            sites,
        })
    }

    /// Smaller block `V_{N,eps}(z) = {x in V_N : max|x_i - z_i| <= eps*N}`.
    pub fn block_sites(&self, block_scale: f64, z: &[i64]) -> Vec<usize> {
        let radius = (block_scale * self.n_half as f64).floor() as i64;
        let grid = self.grid;
        self.sites
            .iter()
            .copied()
            .filter(|&idx| {
                let coords = grid.coords_of(idx);
                coords
                    .iter()
                    .zip(z)
                    .map(|(&c, &zi)| grid.canonical_component(c - zi).abs())
                    .max()
                    .unwrap()
                    <= radius
            })
            .collect()
    }

    pub fn violates(&self, phi: &LatticeField) -> Option<usize> {
        self.sites.iter().copied().find(|&i| phi.values[i] < 0.0)
    }
}

/// One systematic lexicographic sweep of single-site resampling from the
/// exact conditional law; deterministic given `seed`.
pub fn gibbs_sweep(q: &QPolynomial, phi: &LatticeField, seed: u64) -> LatticeField {
    let mut out = phi.clone();
    let row = JRow::compute(q, phi.grid.eps, phi.grid.d);
    let mut rng = stream(seed, "gibbs-sweep", 0);
    sweep_in_place(&row, &mut out, None, &mut rng);
    out
}

/// One hard-wall sweep: sites in the region are resampled from the
/// conditional Gaussian truncated to `[0, inf)`, sites outside are resampled
/// unconstrained. The input must already satisfy the wall constraint.
pub fn truncated_gibbs_sweep(
    q: &QPolynomial,
    phi: &LatticeField,
    region: &PositivityRegion,
    seed: u64,
) -> Result<LatticeField, ConditionalError> {
    if let Some(site) = region.violates(phi) {
        return Err(ConditionalError::PositivityViolated(site));
    }
    let mut out = phi.clone();
    let row = JRow::compute(q, phi.grid.eps, phi.grid.d);
    let mut rng = stream(seed, "gibbs-sweep", 0);
    sweep_in_place(&row, &mut out, Some(region), &mut rng);
    Ok(out)
}

fn sweep_in_place(
    row: &JRow,
    phi: &mut LatticeField,
    region: Option<&PositivityRegion>,
    rng: &mut ChaCha12Rng,
) {
    let grid = phi.grid;
    let sd = (1.0 / row.diagonal).sqrt();
    let n = grid.site_count();
    let mut coords = vec![0i64; grid.d];
    for idx in 0..n {
        let mean = single_site_mean(row, phi, &coords);
        let constrained = region.is_some_and(|r| r.mask[idx]);
        phi.values[idx] = if constrained {
            sample_lower_truncated_normal(rng, mean, sd, 0.0)
        } else {
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        };
        for a in (0..grid.d).rev() {
            coords[a] += 1;
            if coords[a] == grid.l as i64 {
                coords[a] = 0;
            } else {
                break;
            }
        }
    }
}

/// A resumable single-site chain. Sweep `s` draws from the stream
/// `(seed, "gibbs-sweep", s)`, so a chain restored from a checkpoint
/// reproduces the original trajectory exactly.
pub struct GibbsChain {
    q: QPolynomial,
    row: JRow,
    pub field: LatticeField,
    pub seed: u64,
    pub sweep_count: u64,
    region: Option<PositivityRegion>,
}

impl GibbsChain {
    pub fn new(q: QPolynomial, field: LatticeField, seed: u64) -> Self {
        let row = JRow::compute(&q, field.grid.eps, field.grid.d);
        Self {
            q,
            row,
            field,
            seed,
            sweep_count: 0,
            region: None,
        }
    }

    /// Hard-wall chain; the initial state must satisfy the constraint.
    pub fn new_constrained(
        q: QPolynomial,
        field: LatticeField,
        region: PositivityRegion,
        seed: u64,
    ) -> Result<Self, ConditionalError> {
        if let Some(site) = region.violates(&field) {
            return Err(ConditionalError::PositivityViolated(site));
        }
        let row = JRow::compute(&q, field.grid.eps, field.grid.d);
        Ok(Self {
            q,
            row,
            field,
            seed,
            sweep_count: 0,
            region: Some(region),
        })
    }

    pub fn region(&self) -> Option<&PositivityRegion> {
        self.region.as_ref()
    }

    pub fn run(&mut self, sweeps: u64) {
        for _ in 0..sweeps {
            let mut rng = stream(self.seed, "gibbs-sweep", self.sweep_count);
            sweep_in_place(&self.row, &mut self.field, self.region.as_ref(), &mut rng);
            self.sweep_count += 1;
        }
    }

    pub fn checkpoint(&self) -> ChainCheckpoint {
        ChainCheckpoint {
            seed: self.seed,
            sweep_count: self.sweep_count,
            field: self.field.clone(),
            region_half_side: self.region.as_ref().map(|r| r.n_half),
        }
    }

    /// Restore a chain from its checkpoint; continuing it reproduces the
    /// original trajectory sweep for sweep.
    pub fn restore(q: QPolynomial, cp: ChainCheckpoint) -> Result<Self, ConditionalError> {
        let region = match cp.region_half_side {
            Some(n) => Some(PositivityRegion::new(cp.field.grid, n, q.max_degree())?),
            None => None,
        };
        let row = JRow::compute(&q, cp.field.grid.eps, cp.field.grid.d);
        Ok(Self {
            q,
            row,
            field: cp.field,
            seed: cp.seed,
            sweep_count: cp.sweep_count,
            region,
        })
    }

    pub fn model(&self) -> &QPolynomial {
        &self.q
    }
}

/// Serializable chain state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainCheckpoint {
    pub seed: u64,
    pub sweep_count: u64,
    pub field: LatticeField,
    pub region_half_side: Option<usize>,
}

/// Draw from `N(mean, sd^2)` conditioned on `X >= lower` by inverse CDF.
/// With `ubar = Phi_bar((lower - mean)/sd)` and `v` uniform, the draw is
/// `mean + sd * Phi_bar^{-1}(v * ubar)`. For deep means (`alpha` beyond ~36,
/// where `Phi_bar` underflows) the inversion runs on `log Phi_bar` instead,
/// so the sampler stays finite arbitrarily far into the tail.
pub fn sample_lower_truncated_normal(rng: &mut ChaCha12Rng, mean: f64, sd: f64, lower: f64) -> f64 {
    let alpha = (lower - mean) / sd;
    // v in (0, 1]; avoid v = 0 exactly
    let v: f64 = 1.0 - rng.gen::<f64>();
    let z = if alpha < 36.0 {
        let ubar = 0.5 * libm::erfc(alpha / std::f64::consts::SQRT_2);
        let q = (ubar * v).min(1.0 - 1e-16);
        if q > 1e-290 {
            -normal_quantile(q)
        } else {
            log_tail_quantile(q.ln())
        }
    } else {
        log_tail_quantile(log_normal_sf(alpha) + v.ln())
    };
    (mean + sd * z).max(lower)
}

/// Wichura's AS 241 (PPND16): quantile of the standard normal, accurate to
/// ~1e-16 over the full double range. Coefficients kept verbatim.
#[allow(clippy::excessive_precision)]
pub(crate) fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4)
            * r
            + 4.5921953931549871457e4)
            * r
            + 1.3731693765509461125e4)
            * r
            + 1.9715909503065514427e3)
            * r
            + 1.3314166789178437745e2)
            * r
            + 3.3871328727963666080e0)
            * q;
        let den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4)
            * r
            + 2.1213794301586595867e4)
            * r
            + 5.3941960214247511077e3)
            * r
            + 6.8718700749205790830e2)
            * r
            + 4.2313330701600911252e1)
            * r
            + 1.0;
        return num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1)
            * r
            + 1.27045825245236838258e0)
            * r
            + 3.64784832476320460504e0)
            * r
            + 5.76949722146069140550e0)
            * r
            + 4.63033784615654529590e0)
            * r
            + 1.42343711074968357734e0;
        let den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2)
            * r
            + 1.48103976427480074590e-1)
            * r
            + 6.89767334985100004550e-1)
            * r
            + 1.67638483018380384940e0)
            * r
            + 2.05319162663775882187e0)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3)
            * r
            + 2.65321895265761230930e-2)
            * r
            + 2.96560571828504891230e-1)
            * r
            + 1.78482653991729133580e0)
            * r
            + 5.46378491116411436990e0)
            * r
            + 6.65790464350110377720e0;
        let den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5)
            * r
            + 7.86869131145613259100e-4)
            * r
            + 1.48753612908506148525e-2)
            * r
            + 1.36929880922735805310e-1)
            * r
            + 5.99832206555887937690e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// log of the standard normal survival function for large z, by the
/// asymptotic expansion `Phi_bar(z) = phi(z)/z (1 - 1/z^2 + 3/z^4 - ...)`.
pub(crate) fn log_normal_sf(z: f64) -> f64 {
    debug_assert!(z > 6.0);
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)
        + 105.0 / (z2 * z2 * z2 * z2);
    -0.5 * z2 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// Solve `log Phi_bar(z) = target` for `z` (target far in the negative),
/// by Newton iteration with the hazard-rate derivative.
pub(crate) fn log_tail_quantile(target: f64) -> f64 {
    // initial guess from -t = z^2/2 + ln z + ln sqrt(2 pi)
    let t = -target;
    let mut z = (2.0 * t - (2.0 * t).ln().max(0.0) - (2.0 * std::f64::consts::PI).ln())
        .max(1.0)
        .sqrt()
        .max(6.5);
    for _ in 0..8 {
        let f = log_normal_sf(z) - target;
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        let hazard = z / series; // -d/dz log Phi_bar
        let step = f / hazard;
        z += step;
        if step.abs() < 1e-14 * z {
            break;
        }
    }
    z
}
