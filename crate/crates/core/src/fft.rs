//! Minimal d-dimensional FFT on row-major buffers, built from 1-D transforms.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse FFT plans for a cubic lattice `[0, L)^d`.
pub struct NdFft {
    d: usize,
    l: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl NdFft {
    pub fn new(d: usize, l: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d,
            l,
            forward: planner.plan_fft_forward(l),
            inverse: planner.plan_fft_inverse(l),
        }
    }

    /// Total buffer length `L^d` the plans operate on.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    /// In-place forward transform (no normalization).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// In-place inverse transform; divides by `L^d` so that
    /// `inverse(forward(x)) = x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let norm = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= norm;
        }
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len());
        let plan = if forward { &self.forward } else { &self.inverse };
        let l = self.l;
        let n = data.len();
        let mut line = vec![Complex64::default(); l];
        // Axis a has stride l^(d-1-a); gather lines, transform, scatter back.
        let mut stride = n / l;
        for _axis in 0..self.d {
            let block = stride * l;
            for base in (0..n).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + i * stride];
                    }
                    plan.process(&mut line);
                    for (i, slot) in line.iter().enumerate() {
                        data[start + i * stride] = *slot;
                    }
                }
            }
            stride /= l;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let fft = NdFft::new(3, 4);
        let mut data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_is_a_single_bin() {
        let fft = NdFft::new(2, 8);
        let l = 8usize;
        let (mx, my) = (3usize, 5usize);
        let mut data = vec![Complex64::default(); 64];
        for x in 0..l {
            for y in 0..l {
                let phase =
                    2.0 * std::f64::consts::PI * ((mx * x + my * y) as f64) / (l as f64);
                data[x * l + y] = Complex64::new(phase.cos(), phase.sin());
            }
        }
        fft.forward(&mut data);
        for x in 0..l {
            for y in 0..l {
                let v = data[x * l + y];
                if x == mx && y == my {
                    assert!((v - Complex64::new(64.0, 0.0)).norm() < 1e-9);
                } else {
                    assert!(v.norm() < 1e-9, "leak at ({x},{y}): {v}");
                }
            }
        }
    }
}
