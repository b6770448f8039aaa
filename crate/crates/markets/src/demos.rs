//! Monte Carlo demonstrations of the arbitrage portfolios and of how the
//! arbitrage tax removes their guaranteed positivity.

use std::collections::BTreeMap;

use hermite_core::calculus::gain_process;
use hermite_core::confidence::Proportion;
use hermite_core::market::{MixedMarket, MixedPrices, TwoAssetDiffusion};
use hermite_core::portfolio::{Constant, FStrategy, MixedArbitrage, PairwiseSqrt, PowerProduct, Quadratic, ScalarFn};
use hermite_core::tax::{
    f_strategy_cost, fsquare_decomposition, residual_diffusion_euler, residual_diffusion_second, residual_mixed,
    residual_tax, running_cost, running_cost_time,
};
use hermite_core::{GridFunction, SamplePath, TaxSchedule};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seed;

fn param(msg: impl Into<String>) -> crate::Error {
    hermite_core::Error::InvalidParameter(msg.into()).into()
}

/// Outcome of taxing a self-financing strategy along simulated paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxReport {
    /// Running cost `C(t)` of the first path.
    pub cost: Vec<f64>,
    /// Net value `V(t) - C(t)` of the first path.
    pub net: Vec<f64>,
    pub probability: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub paths: usize,
    pub seed: u64,
}

impl TaxReport {
    fn new(cost: Vec<f64>, net: Vec<f64>, positive: Proportion, seed: u64) -> Self {
        Self {
            cost,
            net,
            probability: positive.estimate,
            std_error: positive.std_error,
            ci_low: positive.low,
            ci_high: positive.high,
            paths: positive.trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub demo: String,
    pub parameters: BTreeMap<String, f64>,
    pub paths: usize,
    pub seed: u64,
    pub statistics: BTreeMap<String, f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tax: Option<TaxReport>,
}

fn map<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Value `f(S(t))`, closed-form cost and net value of the `f`-strategy on
/// `S = s0·e^{ℋ}`, with the probability that the net value at grid index
/// `t_index` is positive.
pub fn f_strategy_demo<F: ScalarFn>(f: &F, driver: &SamplePath, s0: f64, c: f64, t_index: usize) -> Result<TaxReport> {
    if !(c >= 0.0) {
        return Err(param(format!("tax intensity must be nonnegative, got {c}")));
    }
    if !(s0 > 0.0) {
        return Err(param("initial price must be positive"));
    }
    if f.value(s0).abs() > 1e-12 * (1.0 + s0 * s0) {
        return Err(param(format!("the strategy must start from zero value, f(S0) = {}", f.value(s0))));
    }
    if t_index > driver.steps() {
        return Err(param(format!("time index {t_index} beyond {} steps", driver.steps())));
    }
    let first = driver.path(0);
    let cost: Vec<f64> = first.iter().map(|h| f_strategy_cost(f, s0 * h.exp(), s0, c)).collect();
    let net: Vec<f64> = first
        .iter()
        .zip(&cost)
        .map(|(h, k)| f.value(s0 * h.exp()) - k)
        .collect();
    let positive = Proportion::count(driver.rows(), |r| {
        let s = s0 * r[t_index].exp();
        f.value(s) - f_strategy_cost(f, s, s0, c) > 0.0
    });
    Ok(TaxReport::new(cost, net, positive, driver.seed()))
}

/// The `f = (x - S₀)²` strategy, compared with the threshold decomposition
/// evaluated on the same terminal values.
pub fn fsquare_demo(driver: &SamplePath, s0: f64, c: f64) -> Result<DemoReport> {
    let t = driver.steps();
    let tax = f_strategy_demo(&Quadratic { center: s0 }, driver, s0, c, t)?;
    let terminal: Vec<f64> = driver.terminal().iter().map(|h| s0 * h.exp()).collect();
    let decomposition = fsquare_decomposition(&terminal, s0, c)?;
    let gap = (tax.probability - decomposition).abs();
    let pass = if c == 0.0 {
        tax.probability == 1.0
    } else {
        tax.ci_high < 1.0 && tax.ci_low > 0.0
    };
    Ok(DemoReport {
        demo: "fsquare".into(),
        parameters: map([("tax", c), ("s0", s0), ("horizon", driver.horizon()), ("steps", t as f64)]),
        paths: driver.num_paths(),
        seed: driver.seed(),
        statistics: map([
            ("probability", tax.probability),
            ("std_error", tax.std_error),
            ("decomposition", decomposition),
            ("decomposition_gap", gap),
        ]),
        ci_low: tax.ci_low,
        ci_high: tax.ci_high,
        pass,
        tax: Some(tax),
    })
}

/// Shiryaev's strategy on `S = e^{ℋ}` with a unit bond: `2S - 2` units of
/// stock and `1 - S²` bonds, worth `(S - 1)²`. With `c > 0` the running
/// cost of the convex hedge is subtracted.
pub fn shiryaev_demo(driver: &SamplePath, c: f64) -> Result<DemoReport> {
    if !(c >= 0.0) {
        return Err(param(format!("tax intensity must be nonnegative, got {c}")));
    }
    let tax = TaxSchedule::new(vec![c, 0.0])?;
    let strategy = FStrategy { f: Quadratic { center: 1.0 } };
    let n = driver.steps() + 1;
    let bond = vec![1.0; n];
    let mut initial_max = 0.0f64;
    let (mut err_sum, mut target_sum) = (0.0, 0.0);
    let mut min_terminal = f64::INFINITY;
    let mut positive = 0;
    let mut net_positive = 0;
    let mut first = None;
    for (i, row) in driver.rows().enumerate() {
        let s: Vec<f64> = row.iter().map(|h| h.exp()).collect();
        let a = GridFunction(s.iter().map(|x| 2.0 * x - 2.0).collect());
        let b = GridFunction(s.iter().map(|x| 1.0 - x * x).collect());
        let gain = gain_process(&[a, b], &[&s, &bond])?;
        let value: Vec<f64> = s.iter().map(|x| (x - 1.0) * (x - 1.0)).collect();
        initial_max = initial_max.max(value[0].abs());
        let target = value[n - 1];
        err_sum += (gain.last() - target).abs();
        target_sum += target.abs();
        min_terminal = min_terminal.min(target);
        positive += usize::from(target > 0.0);
        let cost = running_cost(&strategy, &[&s, &bond], &tax)?;
        let net_terminal = target - cost.last();
        net_positive += usize::from(net_terminal > 0.0);
        if i == 0 {
            let net = value.iter().zip(cost.iter()).map(|(v, k)| v - k).collect();
            first = Some((cost.into_inner(), net));
        }
    }
    let paths = driver.num_paths();
    let relative_error = err_sum / target_sum;
    let arbitrage = Proportion::wilson95(positive, paths);
    let net = Proportion::wilson95(net_positive, paths);
    let pass = if c == 0.0 {
        initial_max == 0.0 && positive == paths
    } else {
        net.high < 1.0
    };
    let (cost, net_path) = first.unwrap_or_default();
    let shown = if c == 0.0 { arbitrage } else { net };
    Ok(DemoReport {
        demo: "shiryaev".into(),
        parameters: map([("tax", c), ("horizon", driver.horizon()), ("steps", driver.steps() as f64)]),
        paths,
        seed: driver.seed(),
        statistics: map([
            ("initial_value_max_abs", initial_max),
            ("terminal_positive_fraction", arbitrage.estimate),
            ("min_terminal_value", min_terminal),
            ("gain_relative_error", relative_error),
            ("net_positive_fraction", net.estimate),
        ]),
        ci_low: shown.low,
        ci_high: shown.high,
        pass,
        tax: Some(TaxReport::new(cost, net_path, shown, driver.seed())),
    })
}

fn random_points(seed: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed, 0, u64::MAX);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(0.5..2.0)).collect())
        .collect()
}

/// `(√S - √V)²` in the two-asset diffusion market with a shared driver.
/// Frictionless: value 0 at the start and positive afterwards, and every
/// `x^a y^{1-a}` satisfies both market equations. Taxed: the zero portfolio
/// is the only solution through `g(1,1) = 0`, and the arbitrage value net of
/// its running cost turns negative on some paths.
pub fn diffusion_arb_demo(market: &TwoAssetDiffusion, w: &SamplePath, tax: &TaxSchedule) -> Result<DemoReport> {
    market.validate()?;
    if !matches!(market, TwoAssetDiffusion::SharedVolatility { .. }) {
        return Err(param("the arbitrage demo needs the shared-volatility market"));
    }
    let [s, v] = market.prices(w)?;
    let g = PairwiseSqrt::pair();
    let mut residual_max = 0.0f64;
    for x in random_points(w.seed(), 100, 3) {
        let a = 4.0 * x[2] - 4.0;
        let pp = PowerProduct::new(vec![a, 1.0 - a]);
        residual_max = residual_max
            .max(residual_diffusion_euler(&pp, x[0], x[1]).abs())
            .max(residual_diffusion_second(&pp, x[0], x[1]).abs());
    }
    let zero = Constant { dim: 2, value: 0.0 };
    let zero_residual = residual_tax(&zero, &[1.3, 0.8], tax)?.abs();
    let n = w.steps();
    let mut min_terminal = f64::INFINITY;
    let mut initial_max = 0.0f64;
    let (mut err_sum, mut target_sum) = (0.0, 0.0);
    let mut negative = 0;
    let mut first = None;
    for i in 0..w.num_paths() {
        let (sp, vp) = (s.path(i), v.path(i));
        let value: Vec<f64> = sp.iter().zip(vp).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).collect();
        initial_max = initial_max.max(value[0]);
        min_terminal = min_terminal.min(value[n]);
        let weights = hermite_core::portfolio::hedge_weights(&g, &[sp, vp]);
        let gain = gain_process(&weights, &[sp, vp])?;
        err_sum += (gain.last() + value[0] - value[n]).abs();
        target_sum += value[n].abs();
        let cost = running_cost(&g, &[sp, vp], tax)?;
        negative += usize::from(value[n] - cost.last() < 0.0);
        if i == 0 {
            let net = value.iter().zip(cost.iter()).map(|(a, b)| a - b).collect();
            first = Some((cost.into_inner(), net));
        }
    }
    let paths = w.num_paths();
    let neg = Proportion::wilson95(negative, paths);
    let pass = if tax.is_frictionless() {
        initial_max < 1e-12 && min_terminal > 0.0 && residual_max < 1e-10
    } else {
        zero_residual == 0.0 && neg.low > 0.0
    };
    let (cost, net) = first.unwrap_or_default();
    let (mu, m, sigma) = match *market {
        TwoAssetDiffusion::SharedVolatility { mu, m, sigma } => (mu, m, sigma),
        TwoAssetDiffusion::Ordered { .. } => unreachable!(),
    };
    Ok(DemoReport {
        demo: "diffusion".into(),
        parameters: map([
            ("mu", mu),
            ("m", m),
            ("sigma", sigma),
            ("tax_s", tax.get(0)),
            ("tax_v", tax.get(1)),
            ("horizon", w.horizon()),
            ("steps", n as f64),
        ]),
        paths,
        seed: w.seed(),
        statistics: map([
            ("initial_value_max_abs", initial_max),
            ("min_terminal_value", min_terminal),
            ("pde_residual_max", residual_max),
            ("zero_solution_residual", zero_residual),
            ("gain_relative_error", err_sum / target_sum),
            ("net_negative_fraction", neg.estimate),
        ]),
        ci_low: neg.low,
        ci_high: neg.high,
        pass,
        tax: Some(TaxReport::new(cost, net, Proportion::wilson95(paths - negative, paths), w.seed())),
    })
}

/// `(√Z + √Y - 2e^{rt/2})²` along the mixed market's `Z^(b)` and `Y^(ρ)`.
pub fn mixed_arb_demo(market: &MixedMarket, prices: &MixedPrices, tax: &TaxSchedule) -> Result<DemoReport> {
    market.validate()?;
    let p = MixedArbitrage { r: market.r };
    use hermite_core::portfolio::TimePortfolio;
    let mut residual_max = 0.0f64;
    for x in random_points(prices.z.seed(), 100, 3) {
        residual_max = residual_max.max(residual_mixed(&p, x[2] - 0.5, x[0], x[1], market.r).abs());
    }
    let (z, y) = (&prices.z, &prices.y);
    let n = z.steps();
    let dt = z.dt();
    let mut initial_max = 0.0f64;
    let mut min_value = f64::INFINITY;
    let mut negative = 0;
    let mut positive = 0;
    let mut first = None;
    for i in 0..z.num_paths() {
        let (zp, yp) = (z.path(i), y.path(i));
        let value: Vec<f64> = (0..=n).map(|k| p.value(k as f64 * dt, &[zp[k], yp[k]])).collect();
        initial_max = initial_max.max(value[0].abs());
        min_value = value.iter().copied().fold(min_value, f64::min);
        positive += usize::from(value[n] > 0.0);
        let cost = running_cost_time(&p, dt, &[zp, yp], tax)?;
        negative += usize::from(value[n] - cost.last() < 0.0);
        if i == 0 {
            let net = value.iter().zip(cost.iter()).map(|(a, b)| a - b).collect();
            first = Some((cost.into_inner(), net));
        }
    }
    let paths = z.num_paths();
    let neg = Proportion::wilson95(negative, paths);
    let pass = if tax.is_frictionless() {
        initial_max < 1e-12 && min_value >= 0.0 && residual_max < 1e-8
    } else {
        neg.low > 0.0
    };
    let (cost, net) = first.unwrap_or_default();
    Ok(DemoReport {
        demo: "mixed".into(),
        parameters: map([
            ("r", market.r),
            ("b", market.b),
            ("rho", market.rho),
            ("hurst", market.hurst),
            ("tax_z", tax.get(0)),
            ("tax_y", tax.get(1)),
            ("horizon", z.horizon()),
            ("steps", n as f64),
        ]),
        paths,
        seed: z.seed(),
        statistics: map([
            ("initial_value_max_abs", initial_max),
            ("min_value", min_value),
            ("pde_residual_max", residual_max),
            ("terminal_positive_fraction", positive as f64 / paths as f64),
            ("net_negative_fraction", neg.estimate),
        ]),
        ci_low: neg.low,
        ci_high: neg.high,
        pass,
        tax: Some(TaxReport::new(cost, net, Proportion::wilson95(paths - negative, paths), z.seed())),
    })
}
