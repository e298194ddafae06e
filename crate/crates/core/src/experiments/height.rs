//! Conditioned interface heights: hard-wall Gibbs chains over growing
//! regions, block averages against the `sqrt(4 k G log N)` height scale, and
//! the conditional-mean block diagnostic over a tiling by screened boxes.

use super::ExperimentError;
use crate::conditional::{BoxGeometry, GibbsChain, PositivityRegion};
use crate::lattice::{LatticeField, ModelSpec, TorusGrid};
use crate::rng::stream;
use crate::spectral::SpectralSampler;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Chain and geometry parameters for the conditioned-height runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightConfig {
    /// Block scale in (0, 1]: the block is `{x : max|x_i - z_i| <= scale*N}`.
    pub block_scale: f64,
    /// Block centre.
    pub z: Vec<i64>,
    /// Region half-sides `N` to sweep.
    pub n_values: Vec<usize>,
    /// Mass regularization `eps = eps_scale / L^2` on the enclosing torus.
    pub eps_scale: f64,
    pub burn_in: u64,
    pub thinning: u64,
    /// Chains per start (two starts are always run).
    pub chains_per_start: usize,
    pub samples_per_chain: usize,
    pub master_seed: u64,
}

impl HeightConfig {
    pub fn quick(n_values: Vec<usize>, master_seed: u64) -> Self {
        Self {
            block_scale: 0.5,
            z: Vec::new(),
            n_values,
            eps_scale: 2.0,
            burn_in: 1000,
            thinning: 10,
            chains_per_start: 2,
            samples_per_chain: 200,
            master_seed,
        }
    }
}

/// Results for one region size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightRow {
    pub n_half: usize,
    pub torus_side: usize,
    pub eps: f64,
    /// conditioned block average, pooled over chains
    pub estimate: f64,
    /// standard error across chain means
    pub std_error: f64,
    /// per-start means (flat start, repelled start)
    pub start_means: (f64, f64),
    /// whether the two-start confidence intervals overlap
    pub converged: bool,
    /// estimate / sqrt(log N)
    pub ratio: f64,
    /// sqrt(4 k G): the limiting ratio scale
    pub target_ratio: f64,
    /// block average of the boxed conditional means, pooled
    pub conditional_mean_block: f64,
    /// unconditioned control: block average over exact free samples
    pub unconditioned_mean: f64,
    pub unconditioned_se: f64,
}

/// Run the conditioned-height experiment: for each `N`, hard-wall chains on
/// a torus holding `V_N` with a `K+1` margin, started once from a flat
/// profile at height 1 and once from a strongly repelled profile, with block
/// averages of both the field and the screened-box conditional means.
/// `g_value` is the infinite-lattice variance used in the target ratio.
pub fn height_run(
    model: &ModelSpec,
    cfg: &HeightConfig,
    g_value: f64,
) -> Result<Vec<HeightRow>, ExperimentError> {
    let k = model.q.min_degree();
    let range = model.q.max_degree();
    let d = model.d;
    let target_ratio = (4.0 * k as f64 * g_value).sqrt();
    let z = if cfg.z.is_empty() {
        vec![0i64; d]
    } else {
        cfg.z.clone()
    };
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let l = 2 * (n + range + 2) + 1;
        let eps = cfg.eps_scale / (l as f64 * l as f64);
        let grid = TorusGrid::new(d, l, eps);
        let region = PositivityRegion::new(grid, n, range)?;
        let block = region.block_sites(cfg.block_scale, &z);
        let a_n = (4.0 * k as f64 * g_value * ((n.max(2)) as f64).ln()).sqrt();

        // screened-box tiling of the block for the conditional-mean
        // diagnostic; side range+4 keeps the parity constraint satisfied.
        // The tiling is anchored at z, so a shifted z exercises the
        // shifted-grid variant of the block average.
        let l_box = range + 4;
        let shell_coeffs = center_mean_coefficients(model, grid, l_box)?;
        let box_centers = tiling_centers(&grid, &block, &z, l_box, range, n);

        // start profiles: flat at 1, and pushed to twice the height scale
        let starts: Vec<LatticeField> = [1.0, 2.0 * a_n]
            .iter()
            .map(|&height| {
                let mut f = LatticeField::zeros(grid);
                for &s in &region.sites {
                    f.values[s] = height;
                }
                f
            })
            .collect();

        // chains in parallel, seeded by index
        let chain_jobs: Vec<(usize, usize)> = (0..2)
            .flat_map(|s| (0..cfg.chains_per_start).map(move |c| (s, c)))
            .collect();
        let chain_results: Vec<(usize, f64, f64)> = chain_jobs
            .par_iter()
            .map(|&(start_idx, chain_idx)| {
                let seed_index =
                    (start_idx * cfg.chains_per_start + chain_idx) as u64 | ((n as u64) << 32);
                let chain_seed = crate::rng::derive_seed(cfg.master_seed, "height-chain", seed_index);
                let mut chain = GibbsChain::new_constrained(
                    model.q.clone(),
                    starts[start_idx].clone(),
                    region.clone(),
                    chain_seed,
                )
                .expect("start satisfies the wall");
                chain.run(cfg.burn_in);
                let mut block_sum = 0.0;
                let mut box_sum = 0.0;
                for _ in 0..cfg.samples_per_chain {
                    chain.run(cfg.thinning);
                    block_sum += block_average(&chain.field, &block);
                    box_sum += boxed_mean_average(&chain.field, &box_centers, &shell_coeffs);
                }
                (
                    start_idx,
                    block_sum / cfg.samples_per_chain as f64,
                    box_sum / cfg.samples_per_chain as f64,
                )
            })
            .collect();

        let mut per_start: Vec<Vec<f64>> = vec![Vec::new(), Vec::new()];
        let mut box_means = Vec::new();
        for &(s, mean, box_mean) in &chain_results {
            per_start[s].push(mean);
            box_means.push(box_mean);
        }
        let all_means: Vec<f64> = chain_results.iter().map(|r| r.1).collect();
        let estimate = mean(&all_means);
        let std_error = std_error_of_mean(&all_means);
        let start_a = mean(&per_start[0]);
        let start_b = mean(&per_start[1]);
        let se_a = std_error_of_mean(&per_start[0]);
        let se_b = std_error_of_mean(&per_start[1]);
        let converged = (start_a - start_b).abs() <= 2.0 * (se_a + se_b) + 1e-12;

        // unconditioned control from exact spectral draws
        let sampler = SpectralSampler::new(&model.q, grid)?;
        let control_draws = (cfg.chains_per_start * cfg.samples_per_chain).max(100);
        let control: Vec<f64> = (0..control_draws)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(cfg.master_seed, "height-control", i as u64 ^ (n as u64) << 32);
                block_average(&sampler.sample_with(&mut rng), &block)
            })
            .collect();

        rows.push(HeightRow {
            n_half: n,
            torus_side: l,
            eps,
            estimate,
            std_error,
            start_means: (start_a, start_b),
            converged,
            ratio: estimate / (n.max(2) as f64).ln().sqrt(),
            target_ratio,
            conditional_mean_block: mean(&box_means),
            unconditioned_mean: mean(&control),
            unconditioned_se: std_error_of_mean(&control),
        });
    }
    Ok(rows)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_error_of_mean(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::INFINITY;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

fn block_average(field: &LatticeField, block: &[usize]) -> f64 {
    block.iter().map(|&i| field.values[i]).sum::<f64>() / block.len() as f64
}

/// Shell coefficients of the centre conditional mean for a screened box:
/// solving `J_BB u = e_c` once, the mean is `-(J u)|_shell . phi_shell`.
fn center_mean_coefficients(
    model: &ModelSpec,
    grid: TorusGrid,
    l_box: usize,
) -> Result<Vec<(Vec<i64>, f64)>, ExperimentError> {
    let geometry = BoxGeometry::new(vec![0; model.d], l_box, model.q.max_degree())?;
    Ok(crate::conditional::center_coefficients(
        &model.q, grid, &geometry,
    )?)
}

/// Box centres on the `l_box`-spaced sublattice anchored at `z` whose shells
/// stay inside `V_N`.
fn tiling_centers(
    grid: &TorusGrid,
    block: &[usize],
    z: &[i64],
    l_box: usize,
    range: usize,
    n: usize,
) -> Vec<Vec<i64>> {
    let outer = ((l_box + range) / 2) as i64;
    let mut centers = Vec::new();
    for &idx in block {
        let coords: Vec<i64> = grid
            .coords_of(idx)
            .iter()
            .map(|&c| grid.canonical_component(c))
            .collect();
        if coords
            .iter()
            .zip(z)
            .all(|(&c, &zi)| (c - zi).rem_euclid(l_box as i64) == 0)
            && coords.iter().all(|&c| c.abs() + outer <= n as i64)
        {
            centers.push(coords);
        }
    }
    centers
}

fn boxed_mean_average(
    field: &LatticeField,
    centers: &[Vec<i64>],
    shell_coeffs: &[(Vec<i64>, f64)],
) -> f64 {
    if centers.is_empty() {
        return f64::NAN;
    }
    let grid = field.grid;
    let mut total = 0.0;
    let mut site = vec![0i64; grid.d];
    for center in centers {
        let mut m = 0.0;
        for (offset, w) in shell_coeffs {
            for (s, (&c, &o)) in site.iter_mut().zip(center.iter().zip(offset)) {
                *s = c + o;
            }
            m += w * field.values[grid.index_of(&site)];
        }
        total += m;
    }
    total / centers.len() as f64
}
