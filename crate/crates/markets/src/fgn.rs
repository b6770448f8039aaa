//! Fractional Gaussian noise by circulant embedding.

use std::sync::Arc;

use hermite_core::hermite::fgn_autocov;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Eigenvalues below this are an embedding failure; smaller negatives are
/// rounding noise and are set to zero.
const EIGEN_TOL: f64 = 1e-10;

/// Samples unit-variance FGN of a fixed length. The embedding spectrum is
/// computed once and shared across samples.
#[derive(Clone)]
pub struct FgnGenerator {
    hurst: f64,
    count: usize,
    sqrt_eigen: Arc<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("hurst", &self.hurst)
            .field("count", &self.count)
            .finish()
    }
}

impl FgnGenerator {
    pub fn new(hurst: f64, count: usize) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(hermite_core::Error::InvalidParameter(format!(
                "inner Hurst index must lie in (1/2, 1), got {hurst}"
            ))
            .into());
        }
        if count == 0 {
            return Err(hermite_core::Error::InvalidParameter("count must be at least 1".into()).into());
        }
        let m = 2 * count;
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= count { k } else { m - k };
                Complex64::new(fgn_autocov(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let scale = 1.0 / m as f64;
        let mut sqrt_eigen = Vec::with_capacity(m);
        for (index, z) in row.iter().enumerate() {
            let eigenvalue = z.re;
            if eigenvalue < -EIGEN_TOL {
                return Err(Error::Embedding { eigenvalue, index });
            }
            sqrt_eigen.push((eigenvalue.max(0.0) * scale).sqrt());
        }
        Ok(Self {
            hurst,
            count,
            sqrt_eigen: Arc::new(sqrt_eigen),
            fft,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// One FGN realization drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .sqrt_eigen
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.count);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// `count` points of unit-variance FGN with Hurst index `inner_hurst`.
pub fn gen_fgn(inner_hurst: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    let generator = FgnGenerator::new(inner_hurst, count)?;
    Ok(generator.sample(&mut crate::seed::rng(seed, 0, 0)))
}
