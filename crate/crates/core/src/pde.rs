//! Finite-difference pricing under tax-inflated volatility, the Gaussian
//! heat kernel and the reduction of the taxed equation to a heat equation.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::portfolio::TimePortfolio;
use crate::special::normal_cdf;
use crate::tax::TaxSchedule;

/// `√(σ² + r ĉ²)`; fails when the inflated variance is not positive.
pub fn effective_volatility(sigma: f64, r: f64, c_hat: f64) -> Result<f64> {
    let v = sigma * sigma + r * c_hat * c_hat;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::IllPosed(format!(
            "σ² + rĉ² = {v} is not positive (σ = {sigma}, r = {r}, ĉ = {c_hat})"
        )));
    }
    Ok(v.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// Black–Scholes price of a European call or put.
pub fn black_scholes(kind: OptionKind, spot: f64, strike: f64, r: f64, sigma: f64, maturity: f64) -> f64 {
    let disc = (-r * maturity).exp();
    let sd = sigma * maturity.sqrt();
    if sd == 0.0 {
        let fwd = spot - strike * disc;
        return match kind {
            OptionKind::Call => fwd.max(0.0),
            OptionKind::Put => (-fwd).max(0.0),
        };
    }
    let d1 = ((spot / strike).ln() + (r + 0.5 * sigma * sigma) * maturity) / sd;
    let d2 = d1 - sd;
    match kind {
        OptionKind::Call => spot * normal_cdf(d1) - strike * disc * normal_cdf(d2),
        OptionKind::Put => strike * disc * normal_cdf(-d2) - spot * normal_cdf(-d1),
    }
}

/// Uniform log-price grid on `[x_min, x_max]` with a θ time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nodes: usize,
    pub time_steps: usize,
    pub theta: f64,
}

impl PdeGrid {
    pub fn new(x_min: f64, x_max: f64, nodes: usize, time_steps: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            nodes,
            time_steps,
            theta: 0.5,
        };
        g.validate()?;
        Ok(g)
    }

    /// A grid centred on `spot` that also covers `strike`, spanning
    /// `width` standard deviations of the log-price at maturity.
    pub fn around(
        spot: f64,
        strike: f64,
        sigma: f64,
        maturity: f64,
        nodes: usize,
        time_steps: usize,
    ) -> Result<Self> {
        if !(spot > 0.0) || !(strike > 0.0) {
            return Err(invalid("spot and strike must be positive"));
        }
        let half = 6.0 * sigma * maturity.sqrt() + (strike / spot).ln().abs() + 0.1;
        Self::new(spot * (-half).exp(), spot * half.exp(), nodes, time_steps)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        self.theta = theta;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0) || !(self.x_max > self.x_min) || !self.x_max.is_finite() {
            return Err(invalid(format!(
                "need 0 < x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.nodes < 16 {
            return Err(invalid(format!("need at least 16 nodes, got {}", self.nodes)));
        }
        if self.time_steps == 0 {
            return Err(invalid("need at least one time step"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid(format!("θ = {} outside [0, 1]", self.theta)));
        }
        Ok(())
    }

    pub fn log_step(&self) -> f64 {
        (self.x_max / self.x_min).ln() / (self.nodes - 1) as f64
    }

    pub fn log_nodes(&self) -> Vec<f64> {
        let (y0, h) = (self.x_min.ln(), self.log_step());
        (0..self.nodes).map(|i| y0 + i as f64 * h).collect()
    }
}

/// Terminal payoff shapes.
#[derive(Clone)]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// `x^p`.
    Power { exponent: f64 },
    Zero,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Call { strike } => write!(f, "Call({strike})"),
            Self::Put { strike } => write!(f, "Put({strike})"),
            Self::Power { exponent } => write!(f, "Power({exponent})"),
            Self::Zero => f.write_str("Zero"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Payoff {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Call { strike } => (x - strike).max(0.0),
            Self::Put { strike } => (strike - x).max(0.0),
            Self::Power { exponent } => x.powf(*exponent),
            Self::Zero => 0.0,
            Self::Custom(f) => f(x),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Call { .. } => "call",
            Self::Put { .. } => "put",
            Self::Power { .. } => "power",
            Self::Zero => "zero",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TerminalClaim {
    pub payoff: Payoff,
    pub maturity: f64,
}

impl TerminalClaim {
    pub fn new(payoff: Payoff, maturity: f64) -> Result<Self> {
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(invalid(format!("maturity must be positive, got {maturity}")));
        }
        Ok(Self { payoff, maturity })
    }

    /// Far-field value with `tau` to maturity: exact for power claims,
    /// otherwise the discounted payoff at the forward price.
    fn boundary(&self, x: f64, tau: f64, r: f64, var: f64) -> f64 {
        match self.payoff {
            Payoff::Power { exponent: p } => {
                x.powf(p) * ((r * p - r + 0.5 * var * p * (p - 1.0)) * tau).exp()
            }
            _ => self.payoff.eval(x * (r * tau).exp()) * (-r * tau).exp(),
        }
    }
}

/// Values on the grid: row `k` holds calendar time `t_k = kT/steps`, so
/// row 0 is the price today.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub prices: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub effective_volatility: f64,
}

impl ValueSurface {
    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.prices.len();
        &self.values[k * n..(k + 1) * n]
    }

    /// Today's value at `spot`, by four-point Lagrange interpolation in
    /// log-price.
    pub fn price(&self, spot: f64) -> Result<f64> {
        self.value_at(0, spot)
    }

    pub fn value_at(&self, k: usize, x: f64) -> Result<f64> {
        let n = self.prices.len();
        let (lo, hi) = (self.prices[0], self.prices[n - 1]);
        if !(x >= lo && x <= hi) {
            return Err(invalid(format!("{x} outside the grid [{lo}, {hi}]")));
        }
        let y0 = lo.ln();
        let h = (hi.ln() - y0) / (n - 1) as f64;
        let pos = (x.ln() - y0) / h;
        let i = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let row = self.row(k);
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (pos - (i + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * row[i + a];
        }
        Ok(acc)
    }
}

fn cell_average(payoff: &Payoff, y: f64, h: f64) -> f64 {
    const SUB: usize = 32;
    let mut acc = 0.0;
    for m in 0..SUB {
        let u = y + h * ((m as f64 + 0.5) / SUB as f64 - 0.5);
        acc += payoff.eval(u.exp());
    }
    acc / SUB as f64
}

/// Solves `h_t + r x h_x - r h + ½ x² (σ² + r ĉ²) h_xx = 0` backward from
/// the claim's maturity.
///
/// Crank–Nicolson (or the grid's θ) in log-price, with two fully implicit
/// start-up steps, cell-averaged terminal data and Dirichlet far fields.
pub fn solve_tax_bsm(claim: &TerminalClaim, r: f64, sigma: f64, c_hat: f64, grid: &PdeGrid) -> Result<ValueSurface> {
    grid.validate()?;
    let s_eff = effective_volatility(sigma, r, c_hat)?;
    let var = s_eff * s_eff;
    let n = grid.nodes;
    let h = grid.log_step();
    let ys = grid.log_nodes();
    let prices: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
    let dt = claim.maturity / grid.time_steps as f64;

    let a = 0.5 * var / (h * h);
    let b = (r - 0.5 * var) / (2.0 * h);
    let (lower, diag, upper) = (a - b, -2.0 * a - r, a + b);

    let mut u: Vec<f64> = ys.iter().map(|&y| cell_average(&claim.payoff, y, h)).collect();
    let mut rows = vec![u.clone()];
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for step in 0..grid.time_steps {
        let theta = if step < 2 { 1.0 } else { grid.theta };
        let tau = (step + 1) as f64 * dt;
        let explicit = (1.0 - theta) * dt;
        for i in 1..n - 1 {
            rhs[i] = u[i] + explicit * (lower * u[i - 1] + diag * u[i] + upper * u[i + 1]);
        }
        let left = claim.boundary(prices[0], tau, r, var);
        let right = claim.boundary(prices[n - 1], tau, r, var);
        let (l, d, up) = (-theta * dt * lower, 1.0 - theta * dt * diag, -theta * dt * upper);
        rhs[1] -= l * left;
        rhs[n - 2] -= up * right;
        thomas(l, d, up, &rhs[1..n - 1], &mut scratch[1..n - 1], &mut u[1..n - 1]);
        u[0] = left;
        u[n - 1] = right;
        rows.push(u.clone());
    }
    rows.reverse();
    let times = (0..=grid.time_steps).map(|k| k as f64 * dt).collect();
    Ok(ValueSurface {
        prices,
        times,
        values: rows.concat(),
        effective_volatility: s_eff,
    })
}

/// Constant-coefficient tridiagonal solve.
fn thomas(l: f64, d: f64, u: f64, rhs: &[f64], c: &mut [f64], out: &mut [f64]) {
    let m = rhs.len();
    c[0] = u / d;
    out[0] = rhs[0] / d;
    for i in 1..m {
        let denom = d - l * c[i - 1];
        c[i] = u / denom;
        out[i] = (rhs[i] - l * out[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        out[i] -= c[i] * out[i + 1];
    }
}

/// Fundamental solution of `f_t = ½ Σ D_jj f_jj` with diagonal `D`.
pub fn heat_kernel(t: f64, x: &[f64], diffusion: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("heat kernel needs t > 0, got {t}")));
    }
    if x.len() != diffusion.len() {
        return Err(Error::DimensionMismatch {
            expected: diffusion.len(),
            found: x.len(),
        });
    }
    if let Some(d) = diffusion.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Singular(format!("diffusion entry {d} is not positive")));
    }
    let det: f64 = diffusion.iter().product();
    let quad: f64 = x.iter().zip(diffusion).map(|(x, d)| x * x / d).sum();
    let n = x.len() as f64;
    Ok((2.0 * PI * t).powf(-0.5 * n) / det.sqrt() * (-quad / (2.0 * t)).exp())
}

/// Advances `u_t = ½ d u_xx` by `steps` Crank–Nicolson steps of size `dt`,
/// holding the end values fixed.
pub fn heat_step_1d(u: &mut [f64], dx: f64, d: f64, dt: f64, steps: usize) -> Result<()> {
    let n = u.len();
    if n < 3 || !(dx > 0.0) || !(d > 0.0) || !(dt > 0.0) {
        return Err(invalid("heat step needs ≥ 3 nodes and positive dx, d, dt"));
    }
    let k = 0.5 * d * dt / (dx * dx);
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for _ in 0..steps {
        for i in 1..n - 1 {
            rhs[i] = u[i] + 0.5 * k * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        }
        let (l, dd) = (-0.5 * k, 1.0 + k);
        rhs[1] -= l * u[0];
        rhs[n - 2] -= l * u[n - 1];
        thomas(l, dd, l, &rhs[1..n - 1], &mut scratch[1..n - 1], &mut u[1..n - 1]);
    }
    Ok(())
}

/// Change of variables `P(t, x) = Q(t, ln x) e^{-bt} Π x_j^{a_j}` taking
/// `P_t + r Σ x_j P_j - r P + ½ Σ c_j² x_j² P_jj = 0` to the backward heat
/// equation `Q_t + ½ Σ c_j² Q_{y_j y_j} = 0`, then `V(s, ·) = Q(T - s, ·)`.
///
/// With `a_j = ½ - r/c_j²` the first-order terms vanish and
/// `b = r Σ a_j - r + ½ Σ c_j² a_j (a_j - 1)` absorbs the zeroth-order ones.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatReduction {
    pub rate: f64,
    pub horizon: f64,
    pub diffusion: Vec<f64>,
    pub exponents: Vec<f64>,
    pub decay: f64,
}

pub fn reduce_to_heat(tax: &TaxSchedule, r: f64, horizon: f64) -> Result<HeatReduction> {
    if tax.is_empty() {
        return Err(invalid("tax schedule is empty"));
    }
    if let Some(j) = tax.intensities().iter().position(|c| *c == 0.0) {
        return Err(Error::Singular(format!(
            "asset {j} has zero tax intensity; the heat reduction needs every c_j > 0"
        )));
    }
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    let diffusion: Vec<f64> = tax.intensities().iter().map(|c| c * c).collect();
    let exponents: Vec<f64> = diffusion.iter().map(|d| 0.5 - r / d).collect();
    let decay = r * exponents.iter().sum::<f64>() - r
        + exponents
            .iter()
            .zip(&diffusion)
            .map(|(a, d)| 0.5 * d * a * (a - 1.0))
            .sum::<f64>();
    Ok(HeatReduction {
        rate: r,
        horizon,
        diffusion,
        exponents,
        decay,
    })
}

impl HeatReduction {
    fn weight(&self, t: f64, x: &[f64]) -> f64 {
        let log: f64 = self.exponents.iter().zip(x).map(|(a, x)| a * x.ln()).sum();
        (log - self.decay * t).exp()
    }

    pub fn p_to_q(&self, t: f64, x: &[f64], p: f64) -> f64 {
        p / self.weight(t, x)
    }

    pub fn q_to_p(&self, t: f64, x: &[f64], q: f64) -> f64 {
        q * self.weight(t, x)
    }

    /// `V(s, x) = Q(T - s, x)` from `P(T - s, x)`.
    pub fn p_to_v(&self, s: f64, x: &[f64], p: f64) -> f64 {
        self.p_to_q(self.horizon - s, x, p)
    }

    /// `P(t, x)` from `V(T - t, x)`.
    pub fn v_to_p(&self, t: f64, x: &[f64], v: f64) -> f64 {
        self.q_to_p(t, x, v)
    }

    /// The heat kernel started `shift` before the horizon and centred at
    /// log-price `center`, pulled back to a solution of the taxed equation.
    pub fn kernel_solution(&self, shift: f64, center: Vec<f64>) -> Result<KernelSolution<'_>> {
        if !(shift > 0.0) {
            return Err(invalid("kernel shift must be positive"));
        }
        if center.len() != self.diffusion.len() {
            return Err(Error::DimensionMismatch {
                expected: self.diffusion.len(),
                found: center.len(),
            });
        }
        Ok(KernelSolution {
            reduction: self,
            shift,
            center,
        })
    }
}

/// `P(t, x) = K(T - t + shift, ln x - center) e^{-bt} Π x_j^{a_j}`.
#[derive(Debug, Clone)]
pub struct KernelSolution<'a> {
    reduction: &'a HeatReduction,
    shift: f64,
    center: Vec<f64>,
}

impl TimePortfolio for KernelSolution<'_> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, t: f64, x: &[f64]) -> f64 {
        let red = self.reduction;
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(x, c)| x.ln() - c).collect();
        let s = red.horizon - t + self.shift;
        let k = heat_kernel(s, &y, &red.diffusion).unwrap_or(f64::NAN);
        red.q_to_p(t, x, k)
    }

    fn label(&self) -> &str {
        "pulled-back heat kernel"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::trapezoid;
    use crate::tax::residual_tax_with_bond;

    #[test]
    fn black_scholes_reference() {
        let c = black_scholes(OptionKind::Call, 100.0, 100.0, 0.05, 0.2, 1.0);
        assert!((c - 10.450_583_572_185_565).abs() < 1e-9, "{c}");
        let p = black_scholes(OptionKind::Put, 100.0, 100.0, 0.05, 0.2, 1.0);
        assert!((c - p - (100.0 - 100.0 * (-0.05f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn ill_posed_volatility() {
        assert!(matches!(effective_volatility(0.1, -1.0, 0.2), Err(Error::IllPosed(_))));
        assert!((effective_volatility(0.2, 0.05, 0.3).unwrap() - (0.04f64 + 0.0045).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn call_matches_closed_form() {
        let claim = TerminalClaim::new(Payoff::Call { strike: 100.0 }, 1.0).unwrap();
        let grid = PdeGrid::around(100.0, 100.0, 0.2, 1.0, 801, 400).unwrap();
        let v = solve_tax_bsm(&claim, 0.05, 0.2, 0.0, &grid).unwrap().price(100.0).unwrap();
        assert!((v / 10.450_583_572_185_565 - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn zero_payoff_stays_zero() {
        let claim = TerminalClaim::new(Payoff::Zero, 1.0).unwrap();
        let grid = PdeGrid::new(10.0, 1000.0, 64, 20).unwrap();
        let s = solve_tax_bsm(&claim, 0.05, 0.2, 0.1, &grid).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn kernel_normalization() {
        assert!((heat_kernel(1.0, &[0.0], &[1.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let h = 1e-3;
        let vals: Vec<f64> = (0..=20_000)
            .map(|i| heat_kernel(0.7, &[-10.0 + i as f64 * h], &[2.0]).unwrap())
            .collect();
        assert!((trapezoid(&vals, h) - 1.0).abs() < 1e-6);
        assert!(heat_kernel(1.0, &[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn reduction_round_trip_and_residual() {
        let tax = TaxSchedule::new(vec![0.3, 0.5]).unwrap();
        let red = reduce_to_heat(&tax, 0.04, 1.0).unwrap();
        let x = [1.3, 0.8];
        let p = 0.731;
        let back = red.v_to_p(0.25, &x, red.p_to_v(0.75, &x, p));
        assert!((back - p).abs() < 1e-14);

        let sol = red.kernel_solution(0.5, vec![0.1, -0.2]).unwrap();
        let res = residual_tax_with_bond(&sol, 0.3, &x, 0.04, &tax).unwrap();
        assert!(res.abs() < 1e-5 * sol.value(0.3, &x).abs().max(1.0), "{res}");
        assert!(reduce_to_heat(&TaxSchedule::new(vec![0.3, 0.0]).unwrap(), 0.04, 1.0).is_err());
    }
}
