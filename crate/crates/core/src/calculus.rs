//! Pathwise (Stratonovich-type) integration against rough drivers.
//!
//! All stochastic integrals are left-point Riemann sums
//! `Σ_k f(t_k) (X(t_{k+1}) - X(t_k))`, which is exactly the gain of the
//! buy-and-hold strategy rebalanced at each grid point. For drivers with
//! Hurst index above one half the sums converge to the pathwise integral and
//! the ordinary chain rule holds.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::path::GridFunction;

fn check_aligned(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            expected: b,
            found: a,
        });
    }
    if a < 2 {
        return Err(Error::InvalidParameter(
            "a grid needs at least two points".into(),
        ));
    }
    Ok(())
}

/// `Σ_k f(t_k) (X(t_{k+1}) - X(t_k))`.
pub fn pathwise_integral(integrand: &[f64], driver: &[f64]) -> Result<f64> {
    check_aligned(integrand.len(), driver.len())?;
    Ok(integrand
        .iter()
        .zip(driver.windows(2))
        .map(|(f, w)| f * (w[1] - w[0]))
        .sum())
}

/// Running values of [`pathwise_integral`] at every grid time, starting at 0.
pub fn pathwise_integral_process(integrand: &[f64], driver: &[f64]) -> Result<GridFunction> {
    check_aligned(integrand.len(), driver.len())?;
    let mut out = Vec::with_capacity(driver.len());
    let mut acc = 0.0;
    out.push(acc);
    for (f, w) in integrand.iter().zip(driver.windows(2)) {
        acc += f * (w[1] - w[0]);
        out.push(acc);
    }
    Ok(GridFunction(out))
}

/// Trapezoidal rule on a uniform grid.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// A function `G(x, t)` with the partials needed by the pathwise chain rule.
pub trait SpaceTimeField {
    fn value(&self, x: f64, t: f64) -> f64;
    fn dx(&self, x: f64, t: f64) -> f64;
    fn dt(&self, x: f64, t: f64) -> f64;
}

/// [`SpaceTimeField`] from three closures.
pub struct FieldFns<G, Gx, Gt> {
    pub value: G,
    pub dx: Gx,
    pub dt: Gt,
}

impl<G, Gx, Gt> SpaceTimeField for FieldFns<G, Gx, Gt>
where
    G: Fn(f64, f64) -> f64,
    Gx: Fn(f64, f64) -> f64,
    Gt: Fn(f64, f64) -> f64,
{
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.value)(x, t)
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        (self.dx)(x, t)
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        (self.dt)(x, t)
    }
}

/// `|G(X(T),T) - G(X(0),0) - ∫ ∂_x G dX - ∫ ∂_t G dt|` along one path.
///
/// The space integral is a left-point sum, the time integral uses the
/// trapezoidal rule.
pub fn chain_rule_residual<G: SpaceTimeField + ?Sized>(
    field: &G,
    driver: &[f64],
    horizon: f64,
) -> Result<f64> {
    let n = driver.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "a grid needs at least two points".into(),
        ));
    }
    let dt = horizon / (n - 1) as f64;
    let t = |k: usize| k as f64 * dt;
    let space: Vec<f64> = driver
        .iter()
        .enumerate()
        .map(|(k, &x)| field.dx(x, t(k)))
        .collect();
    let time: Vec<f64> = driver
        .iter()
        .enumerate()
        .map(|(k, &x)| field.dt(x, t(k)))
        .collect();
    let lhs = field.value(driver[n - 1], horizon) - field.value(driver[0], 0.0);
    let rhs = pathwise_integral(&space, driver)? + trapezoid(&time, dt);
    Ok((lhs - rhs).abs())
}

/// Cumulative gain `Σ_j Σ_k a_j(t_k)(S_j(t_{k+1}) - S_j(t_k))` of holdings
/// `weights[j]` in assets `prices[j]`, reported at every grid time.
pub fn gain_process(weights: &[GridFunction], prices: &[&[f64]]) -> Result<GridFunction> {
    if weights.len() != prices.len() {
        return Err(Error::DimensionMismatch {
            expected: prices.len(),
            found: weights.len(),
        });
    }
    let Some(first) = prices.first() else {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    };
    let n = first.len();
    let mut total = GridFunction::zeros(n);
    for (w, s) in weights.iter().zip(prices) {
        check_aligned(s.len(), n)?;
        let g = pathwise_integral_process(w, s)?;
        for (acc, v) in total.iter_mut().zip(g.iter()) {
            *acc += v;
        }
    }
    Ok(total)
}
