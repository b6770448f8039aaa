//! Arbitrage taxes: the running-cost functional, the pricing-equation
//! residuals with and without tax, and the `f`-strategy closed forms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::path::GridFunction;
use crate::portfolio::{PairwiseSqrt, Portfolio, ScalarFn, Stationary, TimePortfolio};

/// Per-asset tax intensities `c_j ≥ 0`; all zeros is the frictionless market.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaxSchedule {
    intensities: Vec<f64>,
}

impl TaxSchedule {
    pub fn new(intensities: Vec<f64>) -> Result<Self> {
        if let Some(c) = intensities.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(invalid(format!("tax intensity must be finite and nonnegative, got {c}")));
        }
        Ok(Self { intensities })
    }

    pub fn frictionless(n: usize) -> Self {
        Self {
            intensities: vec![0.0; n],
        }
    }

    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.intensities[j]
    }

    pub fn is_frictionless(&self) -> bool {
        self.intensities.iter().all(|c| *c == 0.0)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// `Σ_j ∂_j P(x) x_j - P(x)`; zero exactly when `P` is self-financing
/// without tax.
pub fn residual_no_tax<P: Portfolio + ?Sized>(p: &P, x: &[f64]) -> f64 {
    let euler: f64 = (0..x.len()).map(|j| p.partial(x, j) * x[j]).sum();
    euler - p.value(x)
}

/// `Σ_j ∂_j P x_j - P + Σ_j ½ c_j² ∂_jj P x_j²`.
///
/// Assets with zero intensity contribute no second-order term, so a
/// frictionless schedule reproduces [`residual_no_tax`] exactly.
pub fn residual_tax<P: Portfolio + ?Sized>(p: &P, x: &[f64], tax: &TaxSchedule) -> Result<f64> {
    tax.check_dim(x.len())?;
    Ok(residual_no_tax(p, x) + tax_term(tax, x, |j| p.second_partial(x, j)))
}

fn tax_term(tax: &TaxSchedule, x: &[f64], second: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in tax.intensities().iter().enumerate() {
        if c != 0.0 {
            acc += 0.5 * c * c * second(j) * x[j] * x[j];
        }
    }
    acc
}

/// `∂_t P + r Σ_j ∂_j P x_j - r P + Σ_j ½ c_j² ∂_jj P x_j²`, the taxed
/// equation once a bond `e^{rt}` has been added to the market.
pub fn residual_tax_with_bond<P: TimePortfolio + ?Sized>(
    p: &P,
    t: f64,
    x: &[f64],
    r: f64,
    tax: &TaxSchedule,
) -> Result<f64> {
    tax.check_dim(x.len())?;
    let drift: f64 = (0..x.len()).map(|j| p.partial(t, x, j) * x[j]).sum();
    Ok(p.time_partial(t, x) + r * drift - r * p.value(t, x)
        + tax_term(tax, x, |j| p.second_partial(t, x, j)))
}

/// `∂_t P + r x ∂_x P + r y ∂_y P - r P` for the mixed Hermite market.
pub fn residual_mixed<P: TimePortfolio + ?Sized>(p: &P, t: f64, x: f64, y: f64, r: f64) -> f64 {
    let z = [x, y];
    p.time_partial(t, &z) + r * x * p.partial(t, &z, 0) + r * y * p.partial(t, &z, 1)
        - r * p.value(t, &z)
}

/// Tax-inflated variances `σ_j² + r ĉ_j²`.
pub fn inflated_variances(r: f64, sigmas: [f64; 2], tax: &TaxSchedule) -> Result<[f64; 2]> {
    tax.check_dim(2)?;
    Ok([
        sigmas[0] * sigmas[0] + r * tax.get(0) * tax.get(0),
        sigmas[1] * sigmas[1] + r * tax.get(1) * tax.get(1),
    ])
}

/// Two-asset Black–Scholes residual with tax-inflated variances:
/// `r Σ ∂_j g x_j - r g + ½ Σ ∂_jj g x_j² (σ_j² + r ĉ_j²)`.
pub fn residual_bsm_tax<P: Portfolio + ?Sized>(
    g: &P,
    x: [f64; 2],
    r: f64,
    sigmas: [f64; 2],
    tax: &TaxSchedule,
) -> Result<f64> {
    let v = inflated_variances(r, sigmas, tax)?;
    let mut acc = -r * g.value(&x);
    for j in 0..2 {
        acc += r * g.partial(&x, j) * x[j] + 0.5 * g.second_partial(&x, j) * x[j] * x[j] * v[j];
    }
    Ok(acc)
}

/// First replication condition of the shared-driver diffusion market:
/// `g - ∂_x g x - ∂_y g y`.
pub fn residual_diffusion_euler<P: Portfolio + ?Sized>(g: &P, x: f64, y: f64) -> f64 {
    -residual_no_tax(g, &[x, y])
}

/// Second replication condition of the shared-driver diffusion market:
/// `∂_xx g x² + 2 ∂_xy g xy + ∂_yy g y²`.
///
/// This is the symmetric form; it vanishes on every `x^a y^{1-a}`.
pub fn residual_diffusion_second<P: Portfolio + ?Sized>(g: &P, x: f64, y: f64) -> f64 {
    let z = [x, y];
    g.second_partial(&z, 0) * x * x
        + 2.0 * g.cross_partial(&z, 0, 1) * x * y
        + g.second_partial(&z, 1) * y * y
}

/// Market in which a power pair `x₁^a x₂^b` is priced.
#[derive(Debug, Clone, PartialEq)]
pub enum PairMarket {
    /// Two Black–Scholes assets with rate `r` and tax-inflated variances.
    Bsm {
        r: f64,
        sigmas: [f64; 2],
        tax: TaxSchedule,
    },
    /// Two assets sharing one Brownian driver, no tax.
    SharedDriver,
}

/// Exponents `b` such that `x₁^a x₂^b` solves the pricing equation of
/// `market`. Both roots are returned; they coincide when there is only one.
pub fn power_pair_condition(a: f64, market: &PairMarket) -> Result<[f64; 2]> {
    match market {
        PairMarket::SharedDriver => Ok([1.0 - a, 1.0 - a]),
        PairMarket::Bsm { r, sigmas, tax } => {
            let [v1, v2] = inflated_variances(*r, *sigmas, tax)?;
            // ½v₂ b² + (r - ½v₂) b + (r a - r + ½ a(a-1) v₁) = 0
            let qa = 0.5 * v2;
            let qb = r - 0.5 * v2;
            let qc = r * a - r + 0.5 * a * (a - 1.0) * v1;
            if qa == 0.0 {
                if qb == 0.0 {
                    return Err(Error::Singular("power-pair condition is degenerate".into()));
                }
                let b = -qc / qb;
                return Ok([b, b]);
            }
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return Err(Error::NegativeDiscriminant(disc));
            }
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            let (b1, b2) = if q == 0.0 { (0.0, -qb / qa) } else { (q / qa, qc / q) };
            Ok(if b1 <= b2 { [b1, b2] } else { [b2, b1] })
        }
    }
}

/// `Σ_i Σ_j c_ij (√x_i - √x_j)²` with `c` row-major.
pub fn arbitrage_pc(c: &[f64], x: &[f64]) -> Result<f64> {
    Ok(PairwiseSqrt::new(x.len(), c.to_vec())?.value(x))
}

/// Cumulative running cost
/// `C(t_k) = ½ Σ_j c_j² Σ_{l<k} ∂_jj P(S(t_l)) S_j(t_l) ΔS_j(t_l)`.
pub fn running_cost<P: Portfolio + ?Sized>(
    p: &P,
    prices: &[&[f64]],
    tax: &TaxSchedule,
) -> Result<GridFunction> {
    running_cost_time(&Stationary(p), 1.0, prices, tax)
}

/// [`running_cost`] for time-dependent portfolios on a grid of spacing `dt`.
pub fn running_cost_time<P: TimePortfolio + ?Sized>(
    p: &P,
    dt: f64,
    prices: &[&[f64]],
    tax: &TaxSchedule,
) -> Result<GridFunction> {
    tax.check_dim(prices.len())?;
    let n = prices.first().map_or(0, |s| s.len());
    for s in prices {
        if s.len() != n {
            return Err(Error::GridMismatch {
                expected: n,
                found: s.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut x = vec![0.0; prices.len()];
    if n > 0 {
        out.push(0.0);
    }
    for k in 0..n.saturating_sub(1) {
        for (xi, s) in x.iter_mut().zip(prices) {
            *xi = s[k];
        }
        let t = k as f64 * dt;
        for (j, &c) in tax.intensities().iter().enumerate() {
            if c != 0.0 {
                let ds = prices[j][k + 1] - prices[j][k];
                acc += 0.5 * c * c * p.second_partial(t, &x, j) * x[j] * ds;
            }
        }
        out.push(acc);
    }
    Ok(GridFunction(out))
}

/// Closed-form tax of the `f`-strategy,
/// `(c²/2)(f'(S)S - f(S) - f'(S₀)S₀)`.
pub fn f_strategy_cost<F: ScalarFn>(f: &F, s: f64, s0: f64, c: f64) -> f64 {
    0.5 * c * c * (f.d1(s) * s - f.value(s) - f.d1(s0) * s0)
}

/// Value net of tax, `f(S) - C`.
pub fn f_strategy_net<F: ScalarFn>(f: &F, s: f64, s0: f64, c: f64) -> f64 {
    f.value(s) - f_strategy_cost(f, s, s0, c)
}

/// Rejects intensities for which the threshold `(1+c²/2)/(1-c²/2)` is not
/// a positive number.
pub fn check_fsquare_intensity(c: f64) -> Result<()> {
    if !(c >= 0.0) || c * c >= 2.0 {
        return Err(invalid(format!("tax intensity must lie in [0, √2), got {c}")));
    }
    Ok(())
}

/// `(1 + c²/2) / (1 - c²/2)`.
pub fn fsquare_threshold(c: f64) -> Result<f64> {
    check_fsquare_intensity(c)?;
    let h = 0.5 * c * c;
    Ok((1.0 + h) / (1.0 - h))
}

/// `P{S > θS₀ | S > S₀} P{S > S₀} + P{S < S₀}` on empirical terminal values.
pub fn fsquare_decomposition(terminal: &[f64], s0: f64, c: f64) -> Result<f64> {
    let theta = fsquare_threshold(c)?;
    if terminal.is_empty() {
        return Err(invalid("no terminal values"));
    }
    let n = terminal.len() as f64;
    let above = terminal.iter().filter(|&&s| s > s0).count();
    let far = terminal.iter().filter(|&&s| s > theta * s0).count();
    let below = terminal.iter().filter(|&&s| s < s0).count();
    let conditional = if above == 0 { 0.0 } else { far as f64 / above as f64 };
    Ok(conditional * (above as f64 / n) + below as f64 / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{Constant, FStrategy, Linear, MixedArbitrage, PowerProduct, Quadratic};

    #[test]
    fn euler_identity_and_constants() {
        let x = [1.3, 0.4];
        assert_eq!(residual_no_tax(&Linear { weights: vec![1.0, 0.0] }, &x), 0.0);
        assert_eq!(residual_no_tax(&Constant { dim: 2, value: 1.0 }, &x), -1.0);
        assert!(residual_no_tax(&PairwiseSqrt::pair(), &[1.0, 4.0]).abs() < 1e-14);
    }

    #[test]
    fn tax_breaks_the_sqrt_pair_solution() {
        // (√x - √y)² is convex in each coordinate, so the tax term is positive.
        let tax = TaxSchedule::uniform(2, 0.1).unwrap();
        let r = residual_tax(&PairwiseSqrt::pair(), &[1.0, 4.0], &tax).unwrap();
        assert!(r > 0.0);
        let zero = TaxSchedule::frictionless(2);
        let p = PowerProduct::new(vec![0.3, 0.7]);
        assert_eq!(
            residual_tax(&p, &[1.1, 2.2], &zero).unwrap(),
            residual_no_tax(&p, &[1.1, 2.2])
        );
    }

    #[test]
    fn mixed_arbitrage_solves_bond_equation() {
        let p = MixedArbitrage { r: 0.03 };
        assert!(residual_mixed(&p, 0.8, 1.4, 0.6, 0.03).abs() < 1e-12);
        let xy = Stationary(PowerProduct::new(vec![1.0, 1.0]));
        let res = residual_mixed(&xy, 0.0, 2.0, 3.0, 0.05);
        assert!((res - 0.05 * 6.0).abs() < 1e-12);
    }

    #[test]
    fn power_pair_roots_zero_the_residual() {
        let tax = TaxSchedule::new(vec![0.2, 0.1]).unwrap();
        let market = PairMarket::Bsm {
            r: 0.04,
            sigmas: [0.3, 0.15],
            tax: tax.clone(),
        };
        for a in [-1.0, 0.25, 1.0, 1.1] {
            for b in power_pair_condition(a, &market).unwrap() {
                let g = PowerProduct::new(vec![a, b]);
                let res = residual_bsm_tax(&g, [1.7, 0.6], 0.04, [0.3, 0.15], &tax).unwrap();
                assert!(res.abs() < 1e-12, "a={a} b={b} res={res}");
            }
        }
        let roots = power_pair_condition(1.0, &market).unwrap();
        assert!(roots.iter().any(|b| b.abs() < 1e-15));
        assert!(matches!(
            power_pair_condition(2.5, &market),
            Err(Error::NegativeDiscriminant(_))
        ));
    }

    #[test]
    fn shared_driver_conditions() {
        for a in [-0.5, 0.5, 2.0] {
            let [b, _] = power_pair_condition(a, &PairMarket::SharedDriver).unwrap();
            let g = PowerProduct::new(vec![a, b]);
            assert!(residual_diffusion_euler(&g, 1.3, 0.7).abs() < 1e-12);
            assert!(residual_diffusion_second(&g, 1.3, 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_portfolio_has_no_cost() {
        let s = [1.0, 1.1, 0.95, 1.3];
        let y = [1.0; 4];
        let tax = TaxSchedule::uniform(2, 0.5).unwrap();
        let lin = Linear { weights: vec![2.0, -1.0] };
        let c = running_cost(&lin, &[&s, &y], &tax).unwrap();
        assert!(c.iter().all(|v| *v == 0.0));
        let f = FStrategy { f: Quadratic { center: 1.0 } };
        let zero = running_cost(&f, &[&s, &y], &TaxSchedule::frictionless(2)).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fsquare_closed_form_and_threshold() {
        let f = Quadratic { center: 1.0 };
        let cost = f_strategy_cost(&f, 1.5, 1.0, 0.2);
        assert!((cost - 0.02 * (2.25 - 1.0)).abs() < 1e-15);
        assert!(fsquare_threshold(1.5).is_err());
        assert_eq!(fsquare_threshold(0.0).unwrap(), 1.0);
        let p = fsquare_decomposition(&[0.5, 0.9, 1.01, 1.5, 2.0], 1.0, 0.2).unwrap();
        assert!((p - 0.8).abs() < 1e-15);
    }

    #[test]
    fn frictionless_schedule_validation() {
        assert!(TaxSchedule::new(vec![0.1, -0.1]).is_err());
        assert!(TaxSchedule::new(vec![f64::NAN]).is_err());
        assert!(TaxSchedule::frictionless(3).is_frictionless());
        assert!(residual_tax(&PairwiseSqrt::pair(), &[1.0, 1.0], &TaxSchedule::frictionless(3)).is_err());
    }
}
