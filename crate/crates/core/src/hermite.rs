//! Hermite-process parameters and the deterministic functions attached to them.
//!
//! A Hermite process of rank `κ` and Hurst index `H` is approximated by the
//! partial sums of `He_κ(ξ_j)`, where `ξ` is fractional Gaussian noise with the
//! inner Hurst index `H' = (H - 1)/κ + 1`. Rank 1 is fractional Brownian
//! motion, rank 2 the Rosenblatt process.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::special::{factorial, gamma};

/// Inner lattice points per output step used by default.
pub const DEFAULT_APPROX_FACTOR: usize = 32;

/// How approximate Hermite paths are scaled to unit variance at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by the exact variance of the finite partial sum, so that the
    /// discretized process has `Var[H(1)] = 1` for every lattice size.
    #[default]
    Empirical,
    /// Divide by `n^H` and by the closed-form limit of the normalized
    /// partial-sum variance. Only offered for ranks 1 and 2.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteSpec {
    hurst: f64,
    rank: u32,
    approx_factor: usize,
    normalization: Normalization,
}

impl HermiteSpec {
    pub fn new(hurst: f64, rank: u32) -> Result<Self> {
        check_hurst(hurst)?;
        if rank == 0 {
            return Err(invalid("Hermite rank must be at least 1"));
        }
        Ok(Self {
            hurst,
            rank,
            approx_factor: DEFAULT_APPROX_FACTOR,
            normalization: Normalization::Empirical,
        })
    }

    /// Fractional Brownian motion, i.e. rank one.
    pub fn fbm(hurst: f64) -> Result<Self> {
        Self::new(hurst, 1)
    }

    pub fn with_approx_factor(mut self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("approx_factor must be positive"));
        }
        self.approx_factor = factor;
        Ok(self)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::Analytic && self.rank > 2 {
            return Err(invalid(format!(
                "analytic normalization is only available for rank 1 or 2, got rank {}",
                self.rank
            )));
        }
        self.normalization = normalization;
        Ok(self)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn approx_factor(&self) -> usize {
        self.approx_factor
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn inner_hurst(&self) -> f64 {
        inner_hurst(self.hurst, self.rank)
    }

    /// Factor applied to `Σ_{j ≤ k} He_κ(ξ_j)` for a lattice of `count`
    /// points on `[0, 1]` so that the value at `t = 1` has unit variance.
    pub fn partial_sum_scale(&self, count: usize) -> f64 {
        match self.normalization {
            Normalization::Empirical => 1.0 / partial_sum_variance(self, count).sqrt(),
            Normalization::Analytic => {
                let n = count as f64;
                1.0 / (n.powf(self.hurst) * asymptotic_variance(self.hurst, self.rank).sqrt())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedComponent {
    pub weight: f64,
    pub rank: u32,
}

/// `Σ a_i H^(H, κ_i)` with independent components and `Σ a_i² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedHermiteSpec {
    hurst: f64,
    components: Vec<MixedComponent>,
    approx_factor: usize,
    normalization: Normalization,
}

impl MixedHermiteSpec {
    pub fn new(hurst: f64, components: Vec<MixedComponent>) -> Result<Self> {
        check_hurst(hurst)?;
        if components.is_empty() {
            return Err(invalid("a mixed Hermite process needs at least one component"));
        }
        for c in &components {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(invalid(format!("mixing weight {} must be positive", c.weight)));
            }
            if c.rank == 0 {
                return Err(invalid("Hermite rank must be at least 1"));
            }
        }
        let sum_sq: f64 = components.iter().map(|c| c.weight * c.weight).sum();
        if (sum_sq - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "mixing weights must satisfy sum a_i^2 = 1, got {sum_sq}"
            )));
        }
        Ok(Self {
            hurst,
            components,
            approx_factor: DEFAULT_APPROX_FACTOR,
            normalization: Normalization::Empirical,
        })
    }

    pub fn with_approx_factor(mut self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("approx_factor must be positive"));
        }
        self.approx_factor = factor;
        Ok(self)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Result<Self> {
        for c in &self.components {
            HermiteSpec::new(self.hurst, c.rank)?.with_normalization(normalization)?;
        }
        self.normalization = normalization;
        Ok(self)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn components(&self) -> &[MixedComponent] {
        &self.components
    }

    /// The single-rank spec driving component `i`.
    pub fn component_spec(&self, i: usize) -> HermiteSpec {
        let c = self.components[i];
        HermiteSpec {
            hurst: self.hurst,
            rank: c.rank,
            approx_factor: self.approx_factor,
            normalization: self.normalization,
        }
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(invalid(format!("Hurst index must lie in (1/2, 1), got {hurst}")));
    }
    Ok(())
}

/// `H^(κ) = (H - 1)/κ + 1`.
pub fn inner_hurst(hurst: f64, rank: u32) -> f64 {
    (hurst - 1.0) / rank as f64 + 1.0
}

/// Probabilists' Hermite polynomial `He_order(x)` by the three-term recurrence.
pub fn hermite_poly(order: u32, x: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for m in 1..order {
                let next = x * cur - m as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Covariance `½(t^{2H} + s^{2H} - |t - s|^{2H})` shared by every Hermite process.
pub fn theoretical_cov(hurst: f64, t: f64, s: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

/// Autocovariance of unit-variance fractional Gaussian noise at integer `lag`.
pub fn fgn_autocov(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let h2 = 2.0 * hurst;
    let n = lag as f64;
    0.5 * ((n + 1.0).powf(h2) + (n - 1.0).powf(h2) - 2.0 * n.powf(h2))
}

/// Closed-form normalizing constants `C^(H,1)` and `C^(H,2)`.
pub fn norm_const(hurst: f64, rank: u32) -> Result<f64> {
    check_hurst(hurst)?;
    match rank {
        1 => Ok((2.0 * hurst * gamma(1.5 - hurst)
            / (gamma(0.5 + hurst) * gamma(2.0 - 2.0 * hurst)))
        .sqrt()),
        2 => Ok(gamma(1.0 + hurst / 2.0) * (hurst / 2.0 * (2.0 * hurst - 1.0)).sqrt()
            / (gamma(hurst / 2.0) * gamma(1.0 - hurst))),
        _ => Err(Error::InvalidParameter(format!(
            "closed-form normalizing constant is only known for rank 1 or 2, got {rank}"
        ))),
    }
}

/// Exact `Var[Σ_{j=1}^{count} He_κ(ξ_j)] = κ! Σ_{|k|<count} (count - |k|) ρ(k)^κ`.
pub fn partial_sum_variance(spec: &HermiteSpec, count: usize) -> f64 {
    let inner = spec.inner_hurst();
    let rank = spec.rank as i32;
    let n = count as f64;
    let mut acc = n;
    for k in 1..count {
        acc += 2.0 * (n - k as f64) * fgn_autocov(inner, k).powi(rank);
    }
    factorial(spec.rank) * acc
}

/// Limit of `n^{-2H} Var[Σ_{j ≤ n} He_κ(ξ_j)]`, i.e.
/// `κ! (H'(2H' - 1))^κ / (H(2H - 1))`.
pub fn asymptotic_variance(hurst: f64, rank: u32) -> f64 {
    let inner = inner_hurst(hurst, rank);
    factorial(rank) * (inner * (2.0 * inner - 1.0)).powi(rank as i32)
        / (hurst * (2.0 * hurst - 1.0))
}
