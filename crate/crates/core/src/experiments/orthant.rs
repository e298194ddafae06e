//! Direct Monte Carlo orthant (hard-wall) probabilities and the normalized
//! decay-rate table.

use super::{ExperimentError, RepulsionConfig};
use crate::conditional::PositivityRegion;
use crate::lattice::{ModelSpec, QPolynomial, TorusGrid};
use crate::rng::stream;
use crate::spectral::SpectralSampler;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate with its Wilson interval. In the rare-event regime
/// (`p_hat < 10/draws`) the point estimate is kept but flagged; with zero
/// hits only the one-sided upper bound is reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthantEstimate {
    pub hits: usize,
    pub draws: usize,
    pub p_hat: Option<f64>,
    /// 95% Wilson interval (lower, upper).
    pub ci: (f64, f64),
    pub rare_event_regime: bool,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: usize, draws: usize, z: f64) -> (f64, f64) {
    let n = draws as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

const BATCH: usize = 512;

/// Fraction of exact field draws whose minimum over a site set is
/// nonnegative. Batches are seeded by index and reduced in order, so the
/// estimate is identical for any worker count.
pub fn estimate_orthant_sites(
    q: &QPolynomial,
    grid: TorusGrid,
    sites: &[usize],
    draws: usize,
    master_seed: u64,
) -> Result<OrthantEstimate, ExperimentError> {
    let sampler = SpectralSampler::new(q, grid)?;
    let batches = draws.div_ceil(BATCH);
    let hits_per_batch: Vec<usize> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(master_seed, "orthant", b as u64);
            let in_batch = BATCH.min(draws - b * BATCH);
            let mut hits = 0usize;
            for _ in 0..in_batch {
                let field = sampler.sample_with(&mut rng);
                if sites.iter().all(|&s| field.values[s] >= 0.0) {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hits: usize = hits_per_batch.iter().sum();
    let ci = wilson_interval(hits, draws, 1.96);
    Ok(OrthantEstimate {
        hits,
        draws,
        p_hat: if hits > 0 {
            Some(hits as f64 / draws as f64)
        } else {
            None
        },
        ci,
        rare_event_regime: (hits as f64) < 10.0,
    })
}

/// Hard-wall probability estimate for the configured region `V_N`.
pub fn estimate_orthant(cfg: &RepulsionConfig) -> Result<OrthantEstimate, ExperimentError> {
    cfg.validate()?;
    let region = PositivityRegion::new(cfg.grid, cfg.n_half, cfg.model.q.max_degree())?;
    estimate_orthant_sites(
        &cfg.model.q,
        cfg.grid,
        &region.sites,
        cfg.draws,
        cfg.master_seed,
    )
}

/// Per-draw wall indicators for a family of nested regions under common
/// random numbers: one stream of fields, one indicator per region per draw.
/// Event inclusion makes each row non-increasing in `n` exactly.
pub fn nested_orthant_indicators(
    q: &QPolynomial,
    grid: TorusGrid,
    n_values: &[usize],
    draws: usize,
    master_seed: u64,
) -> Result<Vec<Vec<bool>>, ExperimentError> {
    let sampler = SpectralSampler::new(q, grid)?;
    let max_n = *n_values.iter().max().unwrap();
    // per-site sup-norm radius, for prefix minima over shells
    let radius_of: Vec<usize> = (0..grid.site_count())
        .map(|idx| {
            grid.coords_of(idx)
                .iter()
                .map(|&c| grid.canonical_component(c).unsigned_abs() as usize)
                .max()
                .unwrap()
        })
        .collect();
    let mut rng = stream(master_seed, "orthant-nested", 0);
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        let field = sampler.sample_with(&mut rng);
        let mut shell_min = vec![f64::INFINITY; max_n + 1];
        for (idx, &r) in radius_of.iter().enumerate() {
            if r <= max_n {
                shell_min[r] = shell_min[r].min(field.values[idx]);
            }
        }
        let mut running = f64::INFINITY;
        let mut prefix = Vec::with_capacity(max_n + 1);
        for &m in &shell_min {
            running = running.min(m);
            prefix.push(running);
        }
        out.push(n_values.iter().map(|&n| prefix[n] >= 0.0).collect());
    }
    Ok(out)
}

/// The assembled large-`N` rate constant `2 k q_k G C_k(V)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateAsymptote {
    pub k: usize,
    pub q_k: f64,
    /// infinite-lattice variance `G(0,0)`
    pub g_value: f64,
    /// capacity `C_k(V)` in the `q_k`-free normalization
    pub capacity: f64,
}

impl RateAsymptote {
    pub fn value(&self) -> f64 {
        2.0 * self.k as f64 * self.q_k * self.g_value * self.capacity
    }
}

/// One row of the normalized-rate table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub n_half: usize,
    pub estimate: OrthantEstimate,
    /// `-log p_hat / (N^{d-2k} log(N+1))`; the `N+1` keeps the normalizer
    /// finite at `N = 1`, where `N^{d-2k} log N` degenerates.
    pub normalized_rate: Option<f64>,
    /// rate mapped through the Wilson bounds (upper from lower p, and so on)
    pub rate_ci: (f64, f64),
    pub asymptote: f64,
}

/// Normalized decay rates for each configuration, next to the assembled
/// asymptote. The table exhibits the trend; no convergence claim is encoded.
pub fn rate_table(
    model: &ModelSpec,
    configs: &[RepulsionConfig],
    asymptote: RateAsymptote,
) -> Result<Vec<RateRow>, ExperimentError> {
    let k = model.q.min_degree();
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let estimate = estimate_orthant(cfg)?;
        let n = cfg.n_half;
        let normalizer =
            (n as f64).powi(model.d as i32 - 2 * k as i32) * ((n + 1) as f64).ln();
        let normalized_rate = estimate.p_hat.map(|p| -p.ln() / normalizer);
        let rate_ci = (
            -(estimate.ci.1.min(1.0)).ln() / normalizer,
            if estimate.ci.0 > 0.0 {
                -estimate.ci.0.ln() / normalizer
            } else {
                f64::INFINITY
            },
        );
        rows.push(RateRow {
            n_half: n,
            estimate,
            normalized_rate,
            rate_ci,
            asymptote: asymptote.value(),
        });
    }
    Ok(rows)
}
