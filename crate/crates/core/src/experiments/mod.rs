//! Seeded, persistent experiment drivers for the headline quantities: the
//! hard-wall probability `P(all spins >= 0 on V_N)`, its normalized decay
//! rate against the assembled capacity asymptote, the conditioned interface
//! height, and the entrywise positivity of the inverse precision operator.

mod height;
mod orthant;
mod positivity;
mod store;

pub use height::{height_run, HeightConfig, HeightRow};
pub use orthant::{
    estimate_orthant, estimate_orthant_sites, nested_orthant_indicators, rate_table,
    wilson_interval, OrthantEstimate, RateAsymptote, RateRow,
};
pub use positivity::{inverse_positivity_scan, PositivityScan};
pub use store::{JsonlStore, RunRecord, StoreError, SCHEMA_VERSION};

use crate::lattice::ModelSpec;
use crate::lattice::TorusGrid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Conditional(#[from] crate::conditional::ConditionalError),
    #[error("region V_{n} needs at least {need} draws for a reportable estimate (got {got})")]
    TooFewDraws { n: usize, need: usize, got: usize },
    #[error("no hits in {draws} draws: rare-event regime, only a one-sided bound is available")]
    NoHits { draws: usize },
}

/// Configuration of one direct Monte Carlo hard-wall estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepulsionConfig {
    pub model: ModelSpec,
    pub grid: TorusGrid,
    /// Half-side `N` of the region `V_N = {x : max|x_i| <= N}`.
    pub n_half: usize,
    /// Monte Carlo draws.
    pub draws: usize,
    pub master_seed: u64,
}

impl RepulsionConfig {
    /// The margin rule: `V_N` must sit in the torus with `K+1` free sites on
    /// every side.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let k = self.model.q.max_degree();
        crate::conditional::PositivityRegion::new(self.grid, self.n_half, k)?;
        if self.draws < 100 {
            return Err(ExperimentError::TooFewDraws {
                n: self.n_half,
                need: 100,
                got: self.draws,
            });
        }
        Ok(())
    }
}
