//! Estimators and hypothesis tests used to check simulated paths against
//! the theory of Hermite processes.

use hermite_core::confidence::Proportion;
use hermite_core::hermite::theoretical_cov;
use hermite_core::SamplePath;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::Result;
use crate::process::HermiteSampler;

fn param(msg: impl Into<String>) -> crate::Error {
    hermite_core::Error::InvalidParameter(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Moments {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Jarque-Bera normality test with the asymptotic χ²(2) law.
pub fn jarque_bera(xs: &[f64]) -> TestResult {
    let m = moments(xs);
    let n = xs.len() as f64;
    let statistic = n / 6.0 * (m.skewness * m.skewness + 0.25 * m.excess_kurtosis * m.excess_kurtosis);
    let chi2 = ChiSquared::new(2.0).expect("two degrees of freedom");
    TestResult {
        statistic,
        p_value: chi2.sf(statistic),
    }
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = ne.sqrt();
    TestResult {
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_std_error = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LinearFit {
        slope,
        intercept,
        slope_std_error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovEntry {
    pub t: f64,
    pub s: f64,
    pub sample: f64,
    pub theory: f64,
    pub std_error: f64,
}

impl CovEntry {
    pub fn z_score(&self) -> f64 {
        (self.sample - self.theory).abs() / self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovCheck {
    pub entries: Vec<CovEntry>,
    pub max_z: f64,
    pub max_deviation: f64,
}

impl CovCheck {
    pub fn passes(&self, z: f64) -> bool {
        self.max_z <= z
    }
}

/// Compares the zero-mean sample covariance at `points` equally spaced
/// times `T/points, …, T` against `½(t^{2H} + s^{2H} - |t-s|^{2H})`.
/// Each entry's standard error is the spread of the products over paths.
pub fn covariance_check(path: &SamplePath, hurst: f64, points: usize) -> Result<CovCheck> {
    let n = path.num_paths();
    if points == 0 || points > path.steps() || n < 2 {
        return Err(param("covariance check needs 1 ≤ points ≤ steps and two paths"));
    }
    let idx: Vec<usize> = (1..=points)
        .map(|j| ((j * path.steps()) as f64 / points as f64).round() as usize)
        .collect();
    let mut entries = Vec::new();
    let nf = n as f64;
    for (a, &ka) in idx.iter().enumerate() {
        for &kb in &idx[..=a] {
            let prods: Vec<f64> = path.rows().map(|r| r[ka] * r[kb]).collect();
            let mean = prods.iter().sum::<f64>() / nf;
            let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            let (t, s) = (path.time(ka), path.time(kb));
            entries.push(CovEntry {
                t,
                s,
                sample: mean,
                theory: theoretical_cov(hurst, t, s),
                std_error: (var / nf).sqrt(),
            });
        }
    }
    let max_z = entries.iter().map(CovEntry::z_score).fold(0.0, f64::max);
    let max_deviation = entries.iter().map(|e| (e.sample - e.theory).abs()).fold(0.0, f64::max);
    Ok(CovCheck {
        entries,
        max_z,
        max_deviation,
    })
}

/// Two-sample KS test of `ℋ(cT₀)` against `c^H ℋ(T₀)`, where the larger of
/// the two times is the horizon. The first half of the paths supplies one
/// sample and the second half the other, so the samples are independent.
pub fn self_similarity(path: &SamplePath, hurst: f64, c: f64) -> Result<TestResult> {
    if !(c > 0.0) || c == 1.0 {
        return Err(param("scale factor must be positive and different from 1"));
    }
    let steps = path.steps() as f64;
    let (k_scaled, k_base) = if c > 1.0 {
        (path.steps(), steps / c)
    } else {
        ((steps * c).round() as usize, steps)
    };
    if (k_base - k_base.round()).abs() > 1e-9 {
        return Err(param(format!("time T/{c} is not a grid point")));
    }
    let k_base = k_base as usize;
    let half = path.num_paths() / 2;
    if half < 2 {
        return Err(param("self-similarity check needs at least four paths"));
    }
    let factor = c.powf(hurst);
    let scaled: Vec<f64> = (0..half).map(|i| path.path(i)[k_scaled]).collect();
    let base: Vec<f64> = (half..2 * half).map(|i| factor * path.path(i)[k_base]).collect();
    Ok(ks_two_sample(&scaled, &base))
}

/// Zero-mean autocovariance of the grid increments at each lag, pooled
/// over paths.
pub fn increment_autocov(path: &SamplePath, lags: &[usize]) -> Vec<f64> {
    let incs: Vec<Vec<f64>> = path.rows().map(|r| r.windows(2).map(|w| w[1] - w[0]).collect()).collect();
    lags.iter()
        .map(|&lag| {
            let (mut sum, mut count) = (0.0, 0usize);
            for inc in &incs {
                for k in 0..inc.len().saturating_sub(lag) {
                    sum += inc[k] * inc[k + lag];
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

/// Log-log slope of the increment autocovariance against the lag.
pub fn lrd_slope(path: &SamplePath, lags: &[usize]) -> Result<LinearFit> {
    let cov = increment_autocov(path, lags);
    if let Some(k) = cov.iter().position(|c| !(*c > 0.0)) {
        return Err(param(format!("autocovariance at lag {} is not positive", lags[k])));
    }
    let x: Vec<f64> = lags.iter().map(|&l| (l as f64).ln()).collect();
    let y: Vec<f64> = cov.iter().map(|c| c.ln()).collect();
    Ok(linear_fit(&x, &y))
}

/// Centered quadratic variation on the sub-grid of spacing `block` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenteredQv {
    /// `V = Σ_k [(Δℋ)² - E(Δℋ)²]` for each path.
    pub values: Vec<f64>,
    /// Root mean square of `V` across paths.
    pub normalizer: f64,
    /// Sub-grid spacing `γ = T·block/steps`.
    pub spacing: f64,
}

impl CenteredQv {
    pub fn normalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.normalizer).collect()
    }
}

pub fn centered_qv(path: &SamplePath, block: usize, hurst: f64) -> Result<CenteredQv> {
    if block == 0 || !path.steps().is_multiple_of(block) {
        return Err(param(format!("block {block} must divide steps {}", path.steps())));
    }
    let gamma = path.horizon() * block as f64 / path.steps() as f64;
    let expected = gamma.powf(2.0 * hurst);
    let values: Vec<f64> = path
        .rows()
        .map(|r| {
            r.iter()
                .step_by(block)
                .collect::<Vec<_>>()
                .windows(2)
                .map(|w| (w[1] - w[0]).powi(2) - expected)
                .sum()
        })
        .collect();
    let normalizer = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    Ok(CenteredQv {
        values,
        normalizer,
        spacing: gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurstEstimate {
    pub hurst: f64,
    pub std_error: f64,
}

/// Variance-scaling estimate: the mean square of increments over `2^j` steps
/// grows like `(2^j Δt)^{2H}`. Levels keep at least 32 increments per path.
pub fn estimate_hurst(path: &SamplePath) -> Result<HurstEstimate> {
    if path.steps() < 64 {
        return Err(param(format!("Hurst estimation needs at least 64 steps, got {}", path.steps())));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut lag = 1;
    while path.steps() / lag >= 32 {
        let (mut sum, mut count) = (0.0, 0usize);
        for r in path.rows() {
            for k in (0..path.steps() + 1 - lag).step_by(lag) {
                sum += (r[k + lag] - r[k]).powi(2);
                count += 1;
            }
        }
        x.push((lag as f64 * path.dt()).ln());
        y.push((sum / count as f64).ln());
        lag *= 2;
    }
    let fit = linear_fit(&x, &y);
    Ok(HurstEstimate {
        hurst: fit.slope / 2.0,
        std_error: fit.slope_std_error / 2.0,
    })
}

/// Log-log slope of the path-averaged maximal increment against the
/// spacing over dyadic coarsenings. Maxima are divided by the modulus
/// factor `√(2 ln(T/Δ))`, so Hölder continuity of every order below `H`
/// shows up as a slope near `H`.
pub fn holder_slope(path: &SamplePath) -> Result<LinearFit> {
    if path.steps() < 64 {
        return Err(param("Hölder check needs at least 64 steps"));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut lag = 1;
    while path.steps() / lag >= 16 {
        let mean_max = path
            .rows()
            .map(|r| {
                (0..path.steps() + 1 - lag)
                    .step_by(lag)
                    .map(|k| (r[k + lag] - r[k]).abs())
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / path.num_paths() as f64;
        let spacing = lag as f64 * path.dt();
        let modulus = (2.0 * (path.horizon() / spacing).ln()).sqrt();
        x.push(spacing.ln());
        y.push((mean_max / modulus).ln());
        lag *= 2;
    }
    Ok(linear_fit(&x, &y))
}

/// Monte Carlo estimate of `P(sup_{[0,T]} ℋ ≤ level)` over the sampler's
/// grid, drawing paths one at a time.
pub fn persistence(sampler: &HermiteSampler, paths: usize, level: f64) -> Proportion {
    let hits = (0..paths)
        .into_par_iter()
        .filter(|&i| sampler.sample(i).iter().all(|&v| v <= level))
        .count();
    Proportion::wilson95(hits, paths)
}
