//! Markov portfolio functions `P(x)` and `P(t, x)` with their partials.
//!
//! Implementors supply analytic partials where they have them; the trait
//! defaults fall back to central finite differences.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Step for first partials, `1e-5·max(1, |x_j|)`.
pub fn fd_step(xj: f64) -> f64 {
    1e-5 * xj.abs().max(1.0)
}

/// Step for second partials. The first-derivative step would leave a
/// rounding error of order `ε/h² ≈ 1e-6`, so a larger step is used.
pub fn fd_step_second(xj: f64) -> f64 {
    1e-4 * xj.abs().max(1.0)
}

impl<P: Portfolio + ?Sized> Portfolio for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        (**self).partial(x, j)
    }
    fn second_partial(&self, x: &[f64], j: usize) -> f64 {
        (**self).second_partial(x, j)
    }
    fn cross_partial(&self, x: &[f64], i: usize, j: usize) -> f64 {
        (**self).cross_partial(x, i, j)
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

/// A time-homogeneous portfolio value `P(x)`, `x ∈ (0, ∞)^N`.
pub trait Portfolio {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn partial(&self, x: &[f64], j: usize) -> f64 {
        fd_partial(self, x, j)
    }

    fn second_partial(&self, x: &[f64], j: usize) -> f64 {
        fd_second_partial(self, x, j)
    }

    fn cross_partial(&self, x: &[f64], i: usize, j: usize) -> f64 {
        fd_cross_partial(self, x, i, j)
    }

    fn label(&self) -> &str {
        "portfolio"
    }
}

pub fn fd_partial<P: Portfolio + ?Sized>(p: &P, x: &[f64], j: usize) -> f64 {
    let h = fd_step(x[j]);
    let mut y = x.to_vec();
    y[j] = x[j] + h;
    let up = p.value(&y);
    y[j] = x[j] - h;
    let down = p.value(&y);
    (up - down) / (2.0 * h)
}

pub fn fd_second_partial<P: Portfolio + ?Sized>(p: &P, x: &[f64], j: usize) -> f64 {
    let h = fd_step_second(x[j]);
    let mut y = x.to_vec();
    y[j] = x[j] + h;
    let up = p.value(&y);
    y[j] = x[j] - h;
    let down = p.value(&y);
    (up - 2.0 * p.value(x) + down) / (h * h)
}

pub fn fd_cross_partial<P: Portfolio + ?Sized>(p: &P, x: &[f64], i: usize, j: usize) -> f64 {
    if i == j {
        return fd_second_partial(p, x, i);
    }
    let (hi, hj) = (fd_step_second(x[i]), fd_step_second(x[j]));
    let mut y = x.to_vec();
    let mut eval = |si: f64, sj: f64| {
        y[i] = x[i] + si * hi;
        y[j] = x[j] + sj * hj;
        p.value(&y)
    };
    (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * hi * hj)
}

/// A portfolio value `P(t, x)` that may depend on calendar time.
pub trait TimePortfolio {
    fn dim(&self) -> usize;

    fn value(&self, t: f64, x: &[f64]) -> f64;

    fn time_partial(&self, t: f64, x: &[f64]) -> f64 {
        let h = fd_step(t);
        (self.value(t + h, x) - self.value(t - h, x)) / (2.0 * h)
    }

    fn partial(&self, t: f64, x: &[f64], j: usize) -> f64 {
        fd_partial(&AtTime(self, t), x, j)
    }

    fn second_partial(&self, t: f64, x: &[f64], j: usize) -> f64 {
        fd_second_partial(&AtTime(self, t), x, j)
    }

    fn label(&self) -> &str {
        "time portfolio"
    }
}

/// Freezes the time argument of a [`TimePortfolio`].
pub struct AtTime<'a, P: ?Sized>(pub &'a P, pub f64);

impl<P: TimePortfolio + ?Sized> Portfolio for AtTime<'_, P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(self.1, x)
    }
}

/// Any time-homogeneous portfolio is a time portfolio with `∂_t P = 0`.
pub struct Stationary<P>(pub P);

impl<P: Portfolio> TimePortfolio for Stationary<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        self.0.value(x)
    }
    fn time_partial(&self, _t: f64, _x: &[f64]) -> f64 {
        0.0
    }
    fn partial(&self, _t: f64, x: &[f64], j: usize) -> f64 {
        self.0.partial(x, j)
    }
    fn second_partial(&self, _t: f64, x: &[f64], j: usize) -> f64 {
        self.0.second_partial(x, j)
    }
}

/// A portfolio known only through its value; every partial is numeric.
pub struct FnPortfolio<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> Portfolio for FnPortfolio<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Buy-and-hold: `P(x) = Σ w_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weights: Vec<f64>,
}

impl Portfolio for Linear {
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, x)| w * x).sum()
    }
    fn partial(&self, _x: &[f64], j: usize) -> f64 {
        self.weights[j]
    }
    fn second_partial(&self, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
    fn cross_partial(&self, _x: &[f64], _i: usize, _j: usize) -> f64 {
        0.0
    }
    fn label(&self) -> &str {
        "buy-and-hold"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl Portfolio for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn partial(&self, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
    fn second_partial(&self, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
    fn cross_partial(&self, _x: &[f64], _i: usize, _j: usize) -> f64 {
        0.0
    }
}

/// Perpetual power derivative `scale · Π x_j^{φ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProduct {
    pub exponents: Vec<f64>,
    pub scale: f64,
}

impl PowerProduct {
    pub fn new(exponents: Vec<f64>) -> Self {
        Self {
            exponents,
            scale: 1.0,
        }
    }
}

impl Portfolio for PowerProduct {
    fn dim(&self) -> usize {
        self.exponents.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let log: f64 = self.exponents.iter().zip(x).map(|(p, x)| p * x.ln()).sum();
        self.scale * log.exp()
    }
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        self.exponents[j] * self.value(x) / x[j]
    }
    fn second_partial(&self, x: &[f64], j: usize) -> f64 {
        let p = self.exponents[j];
        p * (p - 1.0) * self.value(x) / (x[j] * x[j])
    }
    fn cross_partial(&self, x: &[f64], i: usize, j: usize) -> f64 {
        if i == j {
            return self.second_partial(x, i);
        }
        self.exponents[i] * self.exponents[j] * self.value(x) / (x[i] * x[j])
    }
    fn label(&self) -> &str {
        "power product"
    }
}

/// `P^(c)(x) = Σ_i Σ_j c_ij (√x_i - √x_j)²`, the arbitrage family of the
/// frictionless pure Hermite market. `c` is row-major `N × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSqrt {
    n: usize,
    c: Vec<f64>,
}

impl PairwiseSqrt {
    pub fn new(n: usize, c: Vec<f64>) -> crate::Result<Self> {
        if c.len() != n * n {
            return Err(crate::Error::DimensionMismatch {
                expected: n * n,
                found: c.len(),
            });
        }
        if c.iter().any(|v| !(*v >= 0.0)) {
            return Err(crate::Error::InvalidParameter(
                "pairwise weights must be nonnegative".into(),
            ));
        }
        Ok(Self { n, c })
    }

    /// `(√x_1 - √x_2)²`.
    pub fn pair() -> Self {
        Self {
            n: 2,
            c: vec![0.0, 1.0, 0.0, 0.0],
        }
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n + j]
    }

    /// Combined weight `c_ij + c_ji` of the unordered pair.
    fn sym(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j) + self.weight(j, i)
    }
}

impl Portfolio for PairwiseSqrt {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = x[i].sqrt() - x[j].sqrt();
                acc += self.weight(i, j) * d * d;
            }
        }
        acc
    }
    // ∂/∂x_k = Σ_{j≠k} s_kj (1 - √x_j/√x_k)
    fn partial(&self, x: &[f64], k: usize) -> f64 {
        let rk = x[k].sqrt();
        (0..self.n)
            .filter(|&j| j != k)
            .map(|j| self.sym(k, j) * (1.0 - x[j].sqrt() / rk))
            .sum()
    }
    fn second_partial(&self, x: &[f64], k: usize) -> f64 {
        let r3 = x[k].powf(1.5);
        (0..self.n)
            .filter(|&j| j != k)
            .map(|j| self.sym(k, j) * 0.5 * x[j].sqrt() / r3)
            .sum()
    }
    fn cross_partial(&self, x: &[f64], i: usize, j: usize) -> f64 {
        if i == j {
            return self.second_partial(x, i);
        }
        -self.sym(i, j) * 0.5 / (x[i].sqrt() * x[j].sqrt())
    }
    fn label(&self) -> &str {
        "pairwise sqrt arbitrage"
    }
}

/// `P^(a,γ)(x) = Π x_k^{γ_k} · Σ a_l ln x_l`; solves the frictionless
/// self-financing PDE whenever `Σγ = 1` and `Σa = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPower {
    pub a: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl LogPower {
    fn parts(&self, x: &[f64]) -> (f64, f64) {
        let pw: f64 = self.gamma.iter().zip(x).map(|(g, x)| g * x.ln()).sum::<f64>().exp();
        let q: f64 = self.a.iter().zip(x).map(|(a, x)| a * x.ln()).sum();
        (pw, q)
    }
}

impl Portfolio for LogPower {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let (pw, q) = self.parts(x);
        pw * q
    }
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        let (pw, q) = self.parts(x);
        pw * (self.gamma[j] * q + self.a[j]) / x[j]
    }
    fn second_partial(&self, x: &[f64], j: usize) -> f64 {
        let (pw, q) = self.parts(x);
        let g = self.gamma[j];
        pw * (g * (g - 1.0) * q + (2.0 * g - 1.0) * self.a[j]) / (x[j] * x[j])
    }
    fn label(&self) -> &str {
        "log-power"
    }
}

/// A scalar function with three derivatives, used to define `f`-strategies.
pub trait ScalarFn {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;
}

/// `f(x) = (x - center)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub center: f64,
}

impl ScalarFn for Quadratic {
    fn value(&self, x: f64) -> f64 {
        (x - self.center) * (x - self.center)
    }
    fn d1(&self, x: f64) -> f64 {
        2.0 * (x - self.center)
    }
    fn d2(&self, _x: f64) -> f64 {
        2.0
    }
    fn d3(&self, _x: f64) -> f64 {
        0.0
    }
}

/// Self-financing strategy with `f'(x)` units of the risky asset and
/// `f(x) - f'(x)x` in a bond of constant price one:
/// `P(x, y) = f'(x)x + (f(x) - f'(x)x)y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FStrategy<F> {
    pub f: F,
}

impl<F: ScalarFn> Portfolio for FStrategy<F> {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let (s, y) = (x[0], x[1]);
        let f = &self.f;
        f.d1(s) * s + (f.value(s) - f.d1(s) * s) * y
    }
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        let (s, y) = (x[0], x[1]);
        let f = &self.f;
        match j {
            0 => f.d2(s) * s + f.d1(s) - f.d2(s) * s * y,
            _ => f.value(s) - f.d1(s) * s,
        }
    }
    fn second_partial(&self, x: &[f64], j: usize) -> f64 {
        let (s, y) = (x[0], x[1]);
        let f = &self.f;
        match j {
            0 => s * f.d3(s) + 2.0 * f.d2(s) - (f.d2(s) + s * f.d3(s)) * y,
            _ => 0.0,
        }
    }
    fn label(&self) -> &str {
        "f-strategy"
    }
}

/// `(√x + √y - 2e^{rt/2})²`, the arbitrage portfolio of the frictionless
/// mixed Hermite market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedArbitrage {
    pub r: f64,
}

impl MixedArbitrage {
    fn u(&self, t: f64, x: &[f64]) -> f64 {
        x[0].sqrt() + x[1].sqrt() - 2.0 * (0.5 * self.r * t).exp()
    }
}

impl TimePortfolio for MixedArbitrage {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        let u = self.u(t, x);
        u * u
    }
    fn time_partial(&self, t: f64, x: &[f64]) -> f64 {
        -2.0 * self.u(t, x) * self.r * (0.5 * self.r * t).exp()
    }
    fn partial(&self, t: f64, x: &[f64], j: usize) -> f64 {
        self.u(t, x) / x[j].sqrt()
    }
    fn second_partial(&self, t: f64, x: &[f64], j: usize) -> f64 {
        0.5 / x[j] - 0.5 * self.u(t, x) / x[j].powf(1.5)
    }
    fn label(&self) -> &str {
        "mixed-market arbitrage"
    }
}

/// The bond `e^{rt}` seen as a portfolio in `dim` risky coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub r: f64,
    pub dim: usize,
}

impl TimePortfolio for Bond {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, t: f64, _x: &[f64]) -> f64 {
        (self.r * t).exp()
    }
    fn time_partial(&self, t: f64, _x: &[f64]) -> f64 {
        self.r * (self.r * t).exp()
    }
    fn partial(&self, _t: f64, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
    fn second_partial(&self, _t: f64, _x: &[f64], _j: usize) -> f64 {
        0.0
    }
}

/// Portfolio weights `a_j(x) = ∂P/∂x_j` evaluated along price paths.
pub fn hedge_weights<P: Portfolio + ?Sized>(p: &P, prices: &[&[f64]]) -> Vec<crate::GridFunction> {
    let n = prices.first().map_or(0, |s| s.len());
    let mut x = vec![0.0; prices.len()];
    (0..prices.len())
        .map(|j| {
            crate::GridFunction(
                (0..n)
                    .map(|k| {
                        for (xi, s) in x.iter_mut().zip(prices) {
                            *xi = s[k];
                        }
                        p.partial(&x, j)
                    })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
    }

    fn check_fd<P: Portfolio>(p: &P, x: &[f64]) {
        for j in 0..p.dim() {
            let (a, n) = (p.partial(x, j), fd_partial(p, x, j));
            assert!(rel(a, n) < 1e-5 || (a - n).abs() < 1e-9, "{} d{j}: {a} vs {n}", p.label());
            let (a, n) = (p.second_partial(x, j), fd_second_partial(p, x, j));
            assert!(rel(a, n) < 1e-5 || (a - n).abs() < 1e-7, "{} d2{j}: {a} vs {n}", p.label());
        }
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        let x = [0.7, 1.9, 3.1];
        check_fd(&Linear { weights: vec![1.0, -2.0, 0.5] }, &x);
        check_fd(&PowerProduct::new(vec![0.4, 1.3, -0.7]), &x);
        check_fd(&PairwiseSqrt::new(3, vec![0.0, 1.0, 2.0, 0.5, 0.0, 1.5, 0.3, 0.2, 0.0]).unwrap(), &x);
        check_fd(&LogPower { a: vec![1.0, -0.4, -0.6], gamma: vec![0.2, 0.5, 0.3] }, &x);
        check_fd(&FStrategy { f: Quadratic { center: 1.0 } }, &[1.4, 1.0]);
    }

    #[test]
    fn cross_partials_match() {
        let p = PowerProduct::new(vec![0.4, 0.6]);
        let x = [1.3, 0.8];
        assert!(rel(p.cross_partial(&x, 0, 1), fd_cross_partial(&p, &x, 0, 1)) < 1e-5);
        let q = PairwiseSqrt::pair();
        assert!(rel(q.cross_partial(&x, 0, 1), fd_cross_partial(&q, &x, 0, 1)) < 1e-5);
    }

    #[test]
    fn time_partials_match() {
        let p = MixedArbitrage { r: 0.05 };
        let (t, x) = (0.7, [1.3, 0.6]);
        let h = 1e-5;
        let fd_t = (p.value(t + h, &x) - p.value(t - h, &x)) / (2.0 * h);
        assert!(rel(p.time_partial(t, &x), fd_t) < 1e-6);
        for j in 0..2 {
            let frozen = AtTime(&p, t);
            assert!(rel(p.partial(t, &x, j), fd_partial(&frozen, &x, j)) < 1e-6);
            assert!(rel(p.second_partial(t, &x, j), fd_second_partial(&frozen, &x, j)) < 1e-5);
        }
    }

    #[test]
    fn f_strategy_second_derivative_at_unit_bond_is_f_double_prime() {
        let p = FStrategy { f: Quadratic { center: 1.0 } };
        assert_eq!(p.second_partial(&[1.7, 1.0], 0), 2.0);
        assert!((p.value(&[1.7, 1.0]) - 0.49).abs() < 1e-12);
    }
}
