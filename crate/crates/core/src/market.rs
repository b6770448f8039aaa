//! Price models built from driver paths, and synthetic riskless assets.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::path::{GridFunction, PathKind, SamplePath};
use crate::tax::TaxSchedule;

/// A coefficient `f(t)` with its derivative `f'(t)`.
#[derive(Clone)]
pub struct TimeFn {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeFn")
    }
}

/// Log-drift and Hermite loading of one asset in a pure Hermite market.
#[derive(Debug, Clone)]
pub enum Coefficients {
    /// `log S(t) = log S(0) + μt + σℋ(t)`.
    Constant { mu: f64, sigma: f64 },
    /// `log S(t) = log S(0) + μ(t) + σ(t)ℋ(t)`.
    TimeDependent { mu: TimeFn, sigma: TimeFn },
}

#[derive(Debug, Clone)]
pub struct HermiteAsset {
    pub initial: f64,
    pub coefficients: Coefficients,
}

impl HermiteAsset {
    pub fn constant(mu: f64, sigma: f64) -> Self {
        Self {
            initial: 1.0,
            coefficients: Coefficients::Constant { mu, sigma },
        }
    }

    fn log_drift(&self, t: f64) -> f64 {
        match &self.coefficients {
            Coefficients::Constant { mu, .. } => mu * t,
            Coefficients::TimeDependent { mu, .. } => (mu.value)(t),
        }
    }

    fn loading(&self, t: f64) -> f64 {
        match &self.coefficients {
            Coefficients::Constant { sigma, .. } => *sigma,
            Coefficients::TimeDependent { sigma, .. } => (sigma.value)(t),
        }
    }
}

/// Risky assets `S_i(t) = S_i(0) exp{μ_i(t) + σ_i(t)ℋ(t)}` sharing one driver.
#[derive(Debug, Clone)]
pub struct PureHermiteMarket {
    assets: Vec<HermiteAsset>,
}

impl PureHermiteMarket {
    pub fn new(assets: Vec<HermiteAsset>) -> Result<Self> {
        if assets.is_empty() {
            return Err(invalid("a market needs at least one asset"));
        }
        for (i, a) in assets.iter().enumerate() {
            if !(a.initial > 0.0) {
                return Err(invalid(format!("asset {i} has initial price {}", a.initial)));
            }
            if let Coefficients::Constant { mu, sigma } = a.coefficients {
                if !(sigma >= 0.0) || !mu.is_finite() {
                    return Err(invalid(format!("asset {i}: need finite μ and σ ≥ 0")));
                }
            }
        }
        Ok(Self { assets })
    }

    /// Constant-coefficient assets with unit initial prices.
    pub fn constant(mu: &[f64], sigma: &[f64]) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                found: sigma.len(),
            });
        }
        Self::new(mu.iter().zip(sigma).map(|(&m, &s)| HermiteAsset::constant(m, s)).collect())
    }

    pub fn assets(&self) -> &[HermiteAsset] {
        &self.assets
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }
}

/// One price path set per asset, all driven by `driver`.
pub fn price_pure_hermite(market: &PureHermiteMarket, driver: &SamplePath) -> Vec<SamplePath> {
    market
        .assets
        .iter()
        .map(|a| {
            driver.map(PathKind::Price, |t, h| {
                a.initial * (a.log_drift(t) + a.loading(t) * h).exp()
            })
        })
        .collect()
}

/// Bond `e^{rt}`, zero-drift GBM `Z`, the mixed Hermite asset `Y` and the
/// general mixed asset `S^(H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedMarket {
    pub r: f64,
    pub b: f64,
    pub rho: f64,
    pub mu: f64,
    pub sigma: f64,
    pub sigma_h: f64,
    pub hurst: f64,
    pub initial: f64,
}

impl MixedMarket {
    /// `σ` and `σ_H` may be zero so that degenerate markets can be built;
    /// `b` and `ρ` must be positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !(self.rho > 0.0) {
            return Err(invalid("mixed market needs b > 0 and ρ > 0"));
        }
        if !(self.sigma >= 0.0) || !(self.sigma_h >= 0.0) {
            return Err(invalid("mixed market volatilities must be nonnegative"));
        }
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(invalid(format!("Hurst index {} outside (1/2, 1)", self.hurst)));
        }
        if !(self.initial > 0.0) || !self.r.is_finite() || !self.mu.is_finite() {
            return Err(invalid("mixed market needs finite r, μ and a positive initial price"));
        }
        Ok(())
    }

    /// `t^{1-2H} ℋ(t)² - t`, taken as 0 at `t = 0`.
    pub fn fractional_drift(&self, t: f64, h: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        t.powf(1.0 - 2.0 * self.hurst) * h * h - t
    }

    pub fn bond(&self, t: f64) -> f64 {
        (self.r * t).exp()
    }

    pub fn z(&self, t: f64, w: f64) -> f64 {
        (-0.5 * self.b * self.b * t + self.b * w).exp()
    }

    pub fn y(&self, t: f64, w: f64, h: f64) -> f64 {
        (w + self.fractional_drift(t, h) + self.rho * h).exp()
    }

    pub fn s_h(&self, t: f64, w: f64, h: f64) -> f64 {
        let s = self.sigma;
        self.initial
            * (self.mu * t + s * w + s * s * self.fractional_drift(t, h) + self.sigma_h * h).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedPrices {
    pub bond: SamplePath,
    pub z: SamplePath,
    pub y: SamplePath,
    pub s_h: SamplePath,
}

fn check_pair(w: &SamplePath, h: &SamplePath) -> Result<()> {
    if w.steps() != h.steps() || w.num_paths() != h.num_paths() {
        return Err(Error::GridMismatch {
            expected: w.values().len(),
            found: h.values().len(),
        });
    }
    if w.horizon() != h.horizon() {
        return Err(invalid("driver horizons differ"));
    }
    Ok(())
}

fn zip_map(w: &SamplePath, h: &SamplePath, f: impl Fn(f64, f64, f64) -> f64) -> SamplePath {
    let width = w.steps() + 1;
    let values = w
        .values()
        .iter()
        .zip(h.values())
        .enumerate()
        .map(|(idx, (&wv, &hv))| f(w.time(idx % width), wv, hv))
        .collect();
    SamplePath::from_rows(w.horizon(), w.steps(), values, w.seed(), PathKind::Price)
}

pub fn price_mixed_market(market: &MixedMarket, w: &SamplePath, h: &SamplePath) -> Result<MixedPrices> {
    market.validate()?;
    check_pair(w, h)?;
    Ok(MixedPrices {
        bond: w.map(PathKind::Price, |t, _| market.bond(t)),
        z: w.map(PathKind::Price, |t, wv| market.z(t, wv)),
        y: zip_map(w, h, |t, wv, hv| market.y(t, wv, hv)),
        s_h: zip_map(w, h, |t, wv, hv| market.s_h(t, wv, hv)),
    })
}

/// Cumulative difference between the realized returns `ΔS/S` of one `S^(H)`
/// path and the right side of its differential equation
/// `(μ - σ²/2 + σ²(1-2H)t^{-2H}ℋ²)Δt + σΔW + (2σ²t^{1-2H}ℋ + σ_H)Δℋ`,
/// evaluated at left grid points.
pub fn sde_residual(
    market: &MixedMarket,
    horizon: f64,
    w: &[f64],
    h: &[f64],
    s: &[f64],
) -> Result<GridFunction> {
    market.validate()?;
    let n = s.len();
    if w.len() != n || h.len() != n {
        return Err(Error::GridMismatch {
            expected: n,
            found: w.len().min(h.len()),
        });
    }
    if n < 2 {
        return Err(invalid("a grid needs at least two points"));
    }
    let dt = horizon / (n - 1) as f64;
    let (sig2, two_h) = (market.sigma * market.sigma, 2.0 * market.hurst);
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..n - 1 {
        let t = k as f64 * dt;
        let (drift_frac, loading_frac) = if t == 0.0 {
            (0.0, 0.0)
        } else {
            (
                sig2 * (1.0 - two_h) * t.powf(-two_h) * h[k] * h[k],
                sig2 * t.powf(1.0 - two_h) * 2.0 * h[k],
            )
        };
        let model = (market.mu - 0.5 * sig2 + drift_frac) * dt
            + market.sigma * (w[k + 1] - w[k])
            + (loading_frac + market.sigma_h) * (h[k + 1] - h[k]);
        acc += (s[k + 1] - s[k]) / s[k] - model;
        out.push(acc);
    }
    Ok(GridFunction(out))
}

/// Two risky assets driven by one Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoAssetDiffusion {
    /// `S_j = exp{(μ_j - σ_j²/2)t + σ_j W}`, `σ₁ > σ₂ > 0`.
    Ordered { mu: [f64; 2], sigma: [f64; 2] },
    /// `S` with drift `mu` and `V` with drift `m`, shared `σ`, `μ ≠ m`.
    SharedVolatility { mu: f64, m: f64, sigma: f64 },
}

impl TwoAssetDiffusion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Ordered { sigma, mu } => {
                if !(sigma[0] > sigma[1] && sigma[1] > 0.0) {
                    return Err(invalid("ordered diffusion market needs σ₁ > σ₂ > 0"));
                }
                if !mu.iter().all(|m| m.is_finite()) {
                    return Err(invalid("drifts must be finite"));
                }
            }
            Self::SharedVolatility { mu, m, sigma } => {
                if !(sigma > 0.0) {
                    return Err(invalid("shared volatility must be positive"));
                }
                if mu == m {
                    return Err(invalid(format!("degenerate market: both assets have drift {mu}")));
                }
            }
        }
        Ok(())
    }

    fn coefficients(&self) -> [(f64, f64); 2] {
        match *self {
            Self::Ordered { mu, sigma } => [(mu[0], sigma[0]), (mu[1], sigma[1])],
            Self::SharedVolatility { mu, m, sigma } => [(mu, sigma), (m, sigma)],
        }
    }

    /// Price paths of both assets (`S` then `V` for the shared variant) from
    /// Brownian paths `w`.
    pub fn prices(&self, w: &SamplePath) -> Result<[SamplePath; 2]> {
        self.validate()?;
        let [(m1, s1), (m2, s2)] = self.coefficients();
        let gbm = |m: f64, s: f64| w.map(PathKind::Price, move |t, wv| ((m - 0.5 * s * s) * t + s * wv).exp());
        Ok([gbm(m1, s1), gbm(m2, s2)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisKind {
    Plain,
    Taxed,
}

/// Power-product portfolio `Π S_j^{e_j}` that grows like `e^{rt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisklessSynthesis {
    pub exponents: Vec<f64>,
    pub rate: f64,
    pub kind: SynthesisKind,
}

impl RisklessSynthesis {
    /// `Σσ_j e_j`.
    pub fn exposure(&self, sigma: &[f64]) -> f64 {
        self.exponents.iter().zip(sigma).map(|(e, s)| e * s).sum()
    }

    /// `Σ e_j - 1 + ½ Σ c_j² e_j (e_j - 1)`; the plain constraint when the
    /// schedule is frictionless.
    pub fn budget_residual(&self, tax: &TaxSchedule) -> f64 {
        budget(&self.exponents, tax.intensities())
    }

    /// `Π_j x_j^{e_j}`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(x).map(|(e, x)| e * x.ln()).sum::<f64>().exp()
    }
}

fn budget(phi: &[f64], c: &[f64]) -> f64 {
    let mut acc = -1.0;
    for (j, &p) in phi.iter().enumerate() {
        acc += p;
        let cj = c.get(j).copied().unwrap_or(0.0);
        if cj != 0.0 {
            acc += 0.5 * cj * cj * p * (p - 1.0);
        }
    }
    acc
}

fn check_vectors(sigma: &[f64], mu: &[f64]) -> Result<()> {
    if sigma.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma.len(),
            found: mu.len(),
        });
    }
    if sigma.len() < 2 {
        return Err(invalid("synthesis needs at least two assets"));
    }
    Ok(())
}

/// Minimal-norm exponents with `Σρ̌ = 1` and `Σρ̌σ = 0`, and `r = Σρ̌μ`.
pub fn synth_riskless(sigma: &[f64], mu: &[f64]) -> Result<RisklessSynthesis> {
    check_vectors(sigma, mu)?;
    let exponents = if sigma.len() == 2 {
        let d = sigma[1] - sigma[0];
        if d == 0.0 {
            return Err(Error::Infeasible("volatilities are all equal".into()));
        }
        let first = sigma[1] / d;
        vec![first, 1.0 - first]
    } else {
        // ρ̌ = Aᵀ(AAᵀ)⁻¹(1, 0) with A = [1ᵀ; σᵀ]
        let n = sigma.len() as f64;
        let mean = sigma.iter().sum::<f64>() / n;
        let ss: f64 = sigma.iter().map(|s| (s - mean) * (s - mean)).sum();
        if !(ss > 1e-300) {
            return Err(Error::Infeasible("volatilities are all equal".into()));
        }
        sigma.iter().map(|s| 1.0 / n - mean * (s - mean) / ss).collect()
    };
    let rate = exponents.iter().zip(mu).map(|(e, m)| e * m).sum();
    Ok(RisklessSynthesis {
        exponents,
        rate,
        kind: SynthesisKind::Plain,
    })
}

/// Exponents with `Σσφ = 0` and `Σφ - 1 + ½Σc²φ(φ-1) = 0`, and `r = Σμφ`.
///
/// Two assets: `φ = s(σ₂, -σ₁)` reduces the budget to a quadratic in `s`
/// whose two roots have opposite signs. The root on the side of the
/// untaxed solution is bracketed and bisected, then polished by Newton.
/// More assets: damped Gauss–Newton with minimal-norm steps from the
/// untaxed solution.
pub fn synth_riskless_taxed(sigma: &[f64], mu: &[f64], tax: &TaxSchedule) -> Result<RisklessSynthesis> {
    check_vectors(sigma, mu)?;
    if tax.len() != sigma.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma.len(),
            found: tax.len(),
        });
    }
    let c = tax.intensities();
    let Some(cmin) = c.iter().copied().filter(|c| *c > 0.0).reduce(f64::min) else {
        let mut plain = synth_riskless(sigma, mu)?;
        plain.kind = SynthesisKind::Taxed;
        return Ok(plain);
    };
    let bound = 1e3 / cmin;
    let phi = if sigma.len() == 2 {
        taxed_pair(sigma, c, bound)?
    } else {
        taxed_gauss_newton(sigma, c, bound)?
    };
    let rate = phi.iter().zip(mu).map(|(e, m)| e * m).sum();
    Ok(RisklessSynthesis {
        exponents: phi,
        rate,
        kind: SynthesisKind::Taxed,
    })
}

fn taxed_pair(sigma: &[f64], c: &[f64], bound: f64) -> Result<Vec<f64>> {
    let v = [sigma[1], -sigma[0]];
    let qa = 0.5 * (c[0] * c[0] * v[0] * v[0] + c[1] * c[1] * v[1] * v[1]);
    let qb = (v[0] + v[1]) - 0.5 * (c[0] * c[0] * v[0] + c[1] * c[1] * v[1]);
    let q = |s: f64| (qa * s + qb) * s - 1.0;
    let vmax = v[0].abs().max(v[1].abs());
    if vmax == 0.0 {
        return Err(Error::Infeasible("all volatilities are zero".into()));
    }
    let smax = bound / vmax;
    let side = if v[0] + v[1] < 0.0 { -1.0 } else { 1.0 };
    let (mut lo, mut hi) = (0.0, side * smax);
    // q(0) = -1, so a root on this side exists iff q changes sign.
    if !(q(hi) > 0.0) {
        let (a, b) = if side > 0.0 { (0.0, hi) } else { (hi, 0.0) };
        return Err(Error::NoRoot { lo: a, hi: b });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if q(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = 2.0 * qa * s + qb;
        if d == 0.0 {
            break;
        }
        s -= q(s) / d;
    }
    Ok(vec![s * v[0], s * v[1]])
}

fn taxed_gauss_newton(sigma: &[f64], c: &[f64], bound: f64) -> Result<Vec<f64>> {
    let n = sigma.len();
    let residual = |phi: &[f64]| {
        let f1: f64 = phi.iter().zip(sigma).map(|(p, s)| p * s).sum();
        [f1, budget(phi, c)]
    };
    let norm = |f: [f64; 2]| (f[0] * f[0] + f[1] * f[1]).sqrt();
    let mut phi = synth_riskless(sigma, &vec![0.0; n])?.exponents;
    let mut f = residual(&phi);
    for _ in 0..200 {
        if norm(f) < 1e-15 {
            return Ok(phi);
        }
        // J rows: σ and 1 + ½c²(2φ - 1)
        let row2: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * c[j] * c[j] * (2.0 * phi[j] - 1.0)).collect();
        let (a11, a12, a22) = (
            sigma.iter().map(|s| s * s).sum::<f64>(),
            sigma.iter().zip(&row2).map(|(s, r)| s * r).sum::<f64>(),
            row2.iter().map(|r| r * r).sum::<f64>(),
        );
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-300 {
            return Err(Error::Singular("Jacobian lost rank during taxed synthesis".into()));
        }
        let l1 = (a22 * f[0] - a12 * f[1]) / det;
        let l2 = (a11 * f[1] - a12 * f[0]) / det;
        let step: Vec<f64> = (0..n).map(|j| -(sigma[j] * l1 + row2[j] * l2)).collect();
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&step).map(|(p, d)| p + lambda * d).collect();
            let ft = residual(&trial);
            if norm(ft) < norm(f) || lambda < 1e-10 {
                phi = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
        if phi.iter().any(|p| p.abs() > bound) {
            return Err(Error::NoRoot { lo: -bound, hi: bound });
        }
    }
    if norm(f) < 1e-12 {
        Ok(phi)
    } else {
        Err(Error::NoRoot { lo: -bound, hi: bound })
    }
}

/// `(μ₂σ₁ - μ₁σ₂)/(σ₁ - σ₂)`.
pub fn bsm_synthetic_rate(mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Result<f64> {
    if sigma1 == sigma2 {
        return Err(Error::Singular(format!("equal volatilities σ₁ = σ₂ = {sigma1}")));
    }
    Ok((mu2 * sigma1 - mu1 * sigma2) / (sigma1 - sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_pair() {
        let s = synth_riskless(&[0.1, 0.3], &[0.02, 0.04]).unwrap();
        assert_eq!(s.exponents, vec![1.5, -0.5]);
        assert!((s.rate - 0.01).abs() < 1e-15);
        assert!(matches!(synth_riskless(&[0.2, 0.2], &[0.0, 0.0]), Err(Error::Infeasible(_))));
    }

    #[test]
    fn plain_minimal_norm_many_assets() {
        let sigma = [0.1, 0.25, 0.4, 0.3];
        let s = synth_riskless(&sigma, &[0.0; 4]).unwrap();
        assert!((s.exponents.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.exposure(&sigma).abs() < 1e-12);
    }

    #[test]
    fn taxed_equal_vols_closed_form() {
        for c in [0.05, 0.3, 2.0] {
            let tax = TaxSchedule::uniform(2, c).unwrap();
            let s = synth_riskless_taxed(&[0.2, 0.2], &[0.05, 0.01], &tax).unwrap();
            assert!((s.exponents[0] - 1.0 / c).abs() < 1e-12 * (1.0 / c));
            assert!((s.exponents[1] + 1.0 / c).abs() < 1e-12 * (1.0 / c));
            assert!((s.rate - 0.04 / c).abs() < 1e-12);
            assert!(s.budget_residual(&tax).abs() < 1e-12);
        }
    }

    #[test]
    fn taxed_general_residuals() {
        let sigma = [0.1, 0.3];
        let tax = TaxSchedule::new(vec![0.2, 0.05]).unwrap();
        let s = synth_riskless_taxed(&sigma, &[0.02, 0.04], &tax).unwrap();
        assert!(s.exposure(&sigma).abs() < 1e-12);
        assert!(s.budget_residual(&tax).abs() < 1e-12);
        // continuity with the untaxed solution
        assert!((s.exponents[0] - 1.5).abs() < 0.1);

        let sigma = [0.1, 0.3, 0.2];
        let tax = TaxSchedule::new(vec![0.2, 0.1, 0.3]).unwrap();
        let s = synth_riskless_taxed(&sigma, &[0.0; 3], &tax).unwrap();
        assert!(s.exposure(&sigma).abs() < 1e-12);
        assert!(s.budget_residual(&tax).abs() < 1e-12);
    }

    #[test]
    fn bsm_rate() {
        assert!((bsm_synthetic_rate(0.07, 0.3, 0.03, 0.1).unwrap() - 0.01).abs() < 1e-15);
        assert!((bsm_synthetic_rate(0.05, 0.3, 0.05, 0.1).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(bsm_synthetic_rate(0.07, 0.3, 0.03, 0.0).unwrap(), 0.03);
        assert!(bsm_synthetic_rate(0.07, 0.3, 0.03, 0.3).is_err());
    }

    #[test]
    fn mixed_prices_at_origin() {
        let m = MixedMarket {
            r: 0.03,
            b: 0.4,
            rho: 0.5,
            mu: 0.05,
            sigma: 0.2,
            sigma_h: 0.3,
            hurst: 0.7,
            initial: 1.0,
        };
        assert_eq!(m.y(0.0, 0.0, 0.0), 1.0);
        assert_eq!(m.z(0.0, 0.0), 1.0);
        assert_eq!(m.s_h(0.0, 0.0, 0.0), 1.0);
        assert!(MixedMarket { b: 0.0, ..m }.validate().is_err());
    }
}
