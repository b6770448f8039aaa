//! Path generators for fractional Brownian motion, Hermite processes, their
//! mixtures and the Hermite Ornstein-Uhlenbeck process.
//!
//! Every path `i` draws from its own stream `seed::rng(seed, i, component)`,
//! so output does not depend on how rayon schedules the work.

use hermite_core::hermite::hermite_poly;
use hermite_core::{HermiteSpec, MixedHermiteSpec, PathKind, SamplePath};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fgn::FgnGenerator;
use crate::seed;

/// Stream index reserved for Brownian drivers, far from any mixture component.
pub const BROWNIAN_STREAM: u64 = 1 << 32;

fn check_grid(horizon: f64, steps: usize) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(hermite_core::Error::InvalidParameter(format!("horizon must be positive, got {horizon}")).into());
    }
    if steps == 0 {
        return Err(hermite_core::Error::InvalidParameter("steps must be at least 1".into()).into());
    }
    Ok(())
}

/// Draws single Hermite paths on `[0, horizon]` by index.
#[derive(Debug, Clone)]
pub struct HermiteSampler {
    spec: HermiteSpec,
    horizon: f64,
    steps: usize,
    seed: u64,
    component: u64,
    fgn: FgnGenerator,
    scale: f64,
}

impl HermiteSampler {
    pub fn new(spec: &HermiteSpec, horizon: f64, steps: usize, seed: u64) -> Result<Self> {
        Self::with_component(spec, horizon, steps, seed, 0)
    }

    pub fn with_component(
        spec: &HermiteSpec,
        horizon: f64,
        steps: usize,
        seed: u64,
        component: u64,
    ) -> Result<Self> {
        check_grid(horizon, steps)?;
        let count = steps
            .checked_mul(spec.approx_factor())
            .ok_or_else(|| hermite_core::Error::InvalidParameter("inner lattice too large".into()))?;
        let fgn = FgnGenerator::new(spec.inner_hurst(), count)?;
        let scale = horizon.powf(spec.hurst()) * spec.partial_sum_scale(count);
        Ok(Self {
            spec: *spec,
            horizon,
            steps,
            seed,
            component,
            fgn,
            scale,
        })
    }

    pub fn spec(&self) -> &HermiteSpec {
        &self.spec
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Path number `index`, `steps + 1` values starting at 0.
    pub fn sample(&self, index: usize) -> Vec<f64> {
        let mut rng = seed::rng(self.seed, index as u64, self.component);
        let xi = self.fgn.sample(&mut rng);
        let rank = self.spec.rank();
        let m = self.spec.approx_factor();
        let mut out = Vec::with_capacity(self.steps + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for block in xi.chunks_exact(m) {
            acc += block.iter().map(|&x| hermite_poly(rank, x)).sum::<f64>();
            out.push(acc * self.scale);
        }
        out
    }

    pub fn generate(&self, paths: usize) -> SamplePath {
        let rows: Vec<Vec<f64>> = (0..paths).into_par_iter().map(|i| self.sample(i)).collect();
        SamplePath::from_rows(self.horizon, self.steps, rows.concat(), self.seed, PathKind::Driver)
    }
}

/// Exact fractional Brownian motion: cumulative sums of FGN on the output grid.
pub fn gen_fbm(spec: &HermiteSpec, horizon: f64, steps: usize, paths: usize, seed: u64) -> Result<SamplePath> {
    if spec.rank() != 1 {
        return Err(hermite_core::Error::InvalidParameter(format!(
            "fractional Brownian motion has rank 1, got {}",
            spec.rank()
        ))
        .into());
    }
    let exact = spec.with_approx_factor(1)?;
    Ok(HermiteSampler::new(&exact, horizon, steps, seed)?.generate(paths))
}

/// Approximate Hermite process from the non-central limit partial sums.
pub fn gen_hermite(spec: &HermiteSpec, horizon: f64, steps: usize, paths: usize, seed: u64) -> Result<SamplePath> {
    Ok(HermiteSampler::new(spec, horizon, steps, seed)?.generate(paths))
}

/// `Σ a_i ℋ^(H, κ_i)`; component `i` of path `p` uses stream `(seed, p, i)`.
pub fn gen_mixed(spec: &MixedHermiteSpec, horizon: f64, steps: usize, paths: usize, seed: u64) -> Result<SamplePath> {
    let samplers = spec
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            HermiteSampler::with_component(&spec.component_spec(i), horizon, steps, seed, i as u64)
                .map(|s| (c.weight, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut row = vec![0.0; steps + 1];
            for (weight, sampler) in &samplers {
                for (acc, v) in row.iter_mut().zip(sampler.sample(p)) {
                    *acc += weight * v;
                }
            }
            row
        })
        .collect();
    Ok(SamplePath::from_rows(horizon, steps, rows.concat(), seed, PathKind::Driver))
}

/// Standard Brownian motion on the same grid conventions.
pub fn gen_brownian(horizon: f64, steps: usize, paths: usize, seed: u64) -> Result<SamplePath> {
    check_grid(horizon, steps)?;
    let sd = (horizon / steps as f64).sqrt();
    let rows: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = seed::rng(seed, p as u64, BROWNIAN_STREAM);
            let mut out = Vec::with_capacity(steps + 1);
            let mut acc = 0.0;
            out.push(acc);
            for _ in 0..steps {
                let z: f64 = rng.sample(StandardNormal);
                acc += sd * z;
                out.push(acc);
            }
            out
        })
        .collect();
    Ok(SamplePath::from_rows(horizon, steps, rows.concat(), seed, PathKind::Driver))
}

/// Hermite Ornstein-Uhlenbeck parameters. The history before time 0 is cut
/// at `-history_truncation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HouSpec {
    lambda: f64,
    sigma: f64,
    history_truncation: f64,
}

impl HouSpec {
    /// Uses the default truncation `20/λ`.
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        Self::with_history(lambda, sigma, 20.0 / lambda)
    }

    pub fn with_history(lambda: f64, sigma: f64, history_truncation: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(hermite_core::Error::InvalidParameter(format!("λ must be positive, got {lambda}")).into());
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(hermite_core::Error::InvalidParameter(format!("σ must be nonnegative, got {sigma}")).into());
        }
        if !(history_truncation > 0.0 && history_truncation.is_finite()) {
            return Err(hermite_core::Error::InvalidParameter(format!(
                "history truncation must be positive, got {history_truncation}"
            ))
            .into());
        }
        Ok(Self {
            lambda,
            sigma,
            history_truncation,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn history_truncation(&self) -> f64 {
        self.history_truncation
    }
}

/// `σ ∫_{-T₀}^t e^{-λ(t-u)} dℋ(u)` by left-point sums on a grid of step
/// `horizon/steps` that extends back to `-T₀`.
pub fn gen_hou(
    spec: &HouSpec,
    hermite: &HermiteSpec,
    horizon: f64,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<SamplePath> {
    check_grid(horizon, steps)?;
    let dt = horizon / steps as f64;
    let prefix = (spec.history_truncation / dt).ceil() as usize;
    let total = prefix + steps;
    let sampler = HermiteSampler::new(hermite, total as f64 * dt, total, seed)?;
    let decay = (-spec.lambda * dt).exp();
    let sigma = spec.sigma;
    let rows: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let h = sampler.sample(p);
            let mut x = 0.0;
            let mut out = Vec::with_capacity(steps + 1);
            for k in 0..total {
                if k >= prefix {
                    out.push(x);
                }
                x = decay * (x + sigma * (h[k + 1] - h[k]));
            }
            out.push(x);
            out
        })
        .collect();
    Ok(SamplePath::from_rows(horizon, steps, rows.concat(), seed, PathKind::Driver))
}
