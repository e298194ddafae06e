//! Exact sampling of the torus field `N(0, J_eps^{-1})` by spectral synthesis,
//! and translation-averaged covariance estimation with jackknife errors.

use super::{SpectralError, SymbolGrid};
use crate::fft::NdFft;
use crate::lattice::{LatticeField, QPolynomial, TorusGrid};
use crate::rng::stream;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

/// Reusable sampler: precomputed per-frequency standard deviations plus FFT
/// plans. Each frequency carries an independent Gaussian of variance
/// `L^d / symbol(m)`, Hermitian-symmetrized so the inverse transform is real.
pub struct SpectralSampler {
    grid: TorusGrid,
    /// sqrt(L^d / symbol) per frequency.
    std_dev: Vec<f64>,
    /// index of the frequency -m for each m.
    conjugate: Vec<u32>,
    fft: NdFft,
}

impl SpectralSampler {
    pub fn new(q: &QPolynomial, grid: TorusGrid) -> Result<Self, SpectralError> {
        if grid.eps <= 0.0 {
            return Err(SpectralError::ZeroModeSingular);
        }
        let symbol = SymbolGrid::new(q, grid)?;
        let n = grid.site_count();
        let ld = n as f64;
        let std_dev: Vec<f64> = symbol.values.iter().map(|&s| (ld / s).sqrt()).collect();
        let mut conjugate = vec![0u32; n];
        for (idx, slot) in conjugate.iter_mut().enumerate() {
            let coords = grid.coords_of(idx);
            let neg: Vec<i64> = coords.iter().map(|&c| -c).collect();
            *slot = grid.index_of(&neg) as u32;
        }
        Ok(Self {
            grid,
            std_dev,
            conjugate,
            fft: NdFft::new(grid.d, grid.l),
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Draw one field. Deterministic given the generator state; frequencies
    /// are filled in index order.
    pub fn sample_with(&self, rng: &mut ChaCha12Rng) -> LatticeField {
        let n = self.grid.site_count();
        let mut coeff = vec![Complex64::default(); n];
        let half = 0.5f64.sqrt();
        for m in 0..n {
            let conj = self.conjugate[m] as usize;
            if conj == m {
                // self-conjugate mode: real Gaussian
                let z: f64 = rng.sample(StandardNormal);
                coeff[m] = Complex64::new(self.std_dev[m] * z, 0.0);
            } else if m < conj {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let v = Complex64::new(re * half, im * half) * self.std_dev[m];
                coeff[m] = v;
                coeff[conj] = v.conj();
            }
        }
        let mut data = coeff;
        self.fft.inverse(&mut data);
        let values: Vec<f64> = data.iter().map(|z| z.re).collect();
        LatticeField { grid: self.grid, values }
    }

    /// Variance of the zero-frequency coefficient `(1/L^d) sum_x phi_x`.
    pub fn zero_mode_variance(&self) -> f64 {
        let n = self.grid.site_count() as f64;
        (self.std_dev[0] * self.std_dev[0]) / (n * n)
    }
}

/// Draw the field `N(0, J_eps^{-1})` on the torus; deterministic in `seed`.
pub fn spectral_sample(
    grid: TorusGrid,
    q: &QPolynomial,
    seed: u64,
) -> Result<LatticeField, SpectralError> {
    let sampler = SpectralSampler::new(q, grid)?;
    let mut rng = stream(seed, "spectral-sample", 0);
    Ok(sampler.sample_with(&mut rng))
}

/// Translation-averaged covariance estimate at one displacement.
#[derive(Debug, Clone)]
pub struct CovarianceRow {
    pub displacement: Vec<i64>,
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimate covariances at the requested displacements from a set of fields,
/// averaging over translations per sample and jackknifing over samples.
pub fn empirical_covariance(
    samples: &[LatticeField],
    displacements: &[Vec<i64>],
) -> Result<Vec<CovarianceRow>, SpectralError> {
    if samples.len() < 2 {
        return Err(SpectralError::NotEnoughSamples {
            need: 2,
            got: samples.len(),
        });
    }
    let grid = samples[0].grid;
    let n_sites = grid.site_count() as f64;
    // per-sample translation-averaged products for each displacement
    let mut per_sample: Vec<Vec<f64>> =
        vec![Vec::with_capacity(samples.len()); displacements.len()];
    let strides = crate::lattice::strides(&grid);
    for field in samples {
        debug_assert_eq!(field.grid, grid);
        for (slot, disp) in displacements.iter().enumerate() {
            let mut acc = 0.0;
            for idx in 0..grid.site_count() {
                let other = shifted_index(&grid, &strides, idx, disp);
                acc += field.values[idx] * field.values[other];
            }
            per_sample[slot].push(acc / n_sites);
        }
    }
    let s = samples.len() as f64;
    let rows = displacements
        .iter()
        .zip(&per_sample)
        .map(|(disp, vals)| {
            let mean: f64 = vals.iter().sum::<f64>() / s;
            // jackknife over samples: leave-one-out means
            let var: f64 = vals
                .iter()
                .map(|&v| {
                    let loo = (mean * s - v) / (s - 1.0);
                    (loo - mean) * (loo - mean)
                })
                .sum::<f64>()
                * (s - 1.0)
                / s;
            CovarianceRow {
                displacement: disp.clone(),
                estimate: mean,
                std_error: var.sqrt(),
            }
        })
        .collect();
    Ok(rows)
}

/// Site index of `coords(idx) + disp` on the torus.
fn shifted_index(grid: &TorusGrid, strides: &[usize], idx: usize, disp: &[i64]) -> usize {
    let l = grid.l as i64;
    let mut out = 0usize;
    for (a, &s) in strides.iter().enumerate() {
        let c = ((idx / s) % grid.l) as i64;
        let shifted = (c + disp[a]).rem_euclid(l) as usize;
        out += shifted * s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GreenTable;

    #[test]
    fn fixed_seed_is_bit_identical() {
        let grid = TorusGrid::new(3, 8, 0.1);
        let q = QPolynomial::free_field();
        let a = spectral_sample(grid, &q, 9).unwrap();
        let b = spectral_sample(grid, &q, 9).unwrap();
        assert_eq!(a.values, b.values);
        let c = spectral_sample(grid, &q, 10).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn zero_mode_variance_formula() {
        // var((1/L^d) sum phi) must equal 1 / (L^d q(eps)); checked at 4 sigma
        // over 10^4 draws.
        let grid = TorusGrid::new(2, 8, 0.5);
        let q = QPolynomial::mixed();
        let sampler = SpectralSampler::new(&q, grid).unwrap();
        let want = 1.0 / (grid.site_count() as f64 * q.eval(grid.eps));
        assert!((sampler.zero_mode_variance() - want).abs() < 1e-12 * want);

        let mut rng = stream(17, "zero-mode-test", 0);
        let draws = 10_000;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let f = sampler.sample_with(&mut rng);
            let mean: f64 = f.values.iter().sum::<f64>() / grid.site_count() as f64;
            sum_sq += mean * mean;
        }
        let est = sum_sq / draws as f64;
        // variance of the variance estimate: 2 want^2 / draws
        let se = want * (2.0 / draws as f64).sqrt();
        assert!(
            (est - want).abs() < 4.0 * se,
            "est {est}, want {want}, se {se}"
        );
    }

    #[test]
    fn empirical_covariance_of_zero_fields() {
        let grid = TorusGrid::new(2, 4, 0.1);
        let samples = vec![LatticeField::zeros(grid), LatticeField::zeros(grid)];
        let rows = empirical_covariance(&samples, &[vec![0, 0], vec![1, 0]]).unwrap();
        for row in rows {
            assert_eq!(row.estimate, 0.0);
            assert_eq!(row.std_error, 0.0);
        }
    }

    #[test]
    fn empirical_covariance_of_cosine_fields() {
        // A single-frequency field has translation-averaged covariance
        // (a^2/2) cos(2 pi m.v / L) exactly, for every sample.
        let grid = TorusGrid::new(1, 8, 0.1);
        let amp = 1.3;
        let m = 2i64;
        let mk = |phase: f64| {
            let values = (0..8)
                .map(|x| {
                    amp * (2.0 * std::f64::consts::PI * (m * x) as f64 / 8.0 + phase).cos()
                })
                .collect();
            LatticeField::from_values(grid, values).unwrap()
        };
        let samples = vec![mk(0.0), mk(1.0), mk(2.5)];
        let rows = empirical_covariance(&samples, &[vec![0], vec![1], vec![3]]).unwrap();
        for row in &rows {
            let want = 0.5
                * amp
                * amp
                * (2.0 * std::f64::consts::PI * (m * row.displacement[0]) as f64 / 8.0).cos();
            assert!(
                (row.estimate - want).abs() < 1e-12,
                "disp {:?}: {} vs {}",
                row.displacement,
                row.estimate,
                want
            );
            assert!(row.std_error < 1e-12);
        }
    }

    #[test]
    fn sampler_covariance_matches_green_table() {
        let grid = TorusGrid::new(2, 8, 0.3);
        let q = QPolynomial::free_field();
        let sampler = SpectralSampler::new(&q, grid).unwrap();
        let table = GreenTable::compute(&q, grid).unwrap();
        let mut rng = stream(4, "cov-test", 0);
        let samples: Vec<LatticeField> = (0..4000).map(|_| sampler.sample_with(&mut rng)).collect();
        let disps = vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 0]];
        let rows = empirical_covariance(&samples, &disps).unwrap();
        for row in rows {
            let want = table.value(&row.displacement);
            assert!(
                (row.estimate - want).abs() < 4.0 * row.std_error,
                "disp {:?}: est {} want {} se {}",
                row.displacement,
                row.estimate,
                want,
                row.std_error
            );
        }
    }
}
