use hermite_core::calculus::pathwise_integral;
use hermite_core::market::{price_mixed_market, MixedMarket, TwoAssetDiffusion};
use hermite_core::portfolio::Quadratic;
use hermite_core::{HermiteSpec, SamplePath, TaxSchedule};
use hermite_markets::demos::{diffusion_arb_demo, f_strategy_demo, fsquare_demo, mixed_arb_demo, shiryaev_demo};
use hermite_markets::{gen_brownian, gen_fbm, gen_hermite};

fn fbm(h: f64, steps: usize, paths: usize, seed: u64) -> SamplePath {
    gen_fbm(&HermiteSpec::fbm(h).unwrap(), 1.0, steps, paths, seed).unwrap()
}

const MARKET: TwoAssetDiffusion = TwoAssetDiffusion::SharedVolatility {
    mu: 0.08,
    m: 0.03,
    sigma: 0.2,
};

const MIXED: MixedMarket = MixedMarket {
    r: 0.03,
    b: 0.2,
    rho: 0.3,
    mu: 0.05,
    sigma: 0.2,
    sigma_h: 0.1,
    hurst: 0.7,
    initial: 1.0,
};

#[test]
fn left_point_integral_error_vanishes_under_refinement() {
    // ∫ℋdℋ - ℋ(T)²/2 = -½Σ(Δℋ)², which shrinks like n^{1-2H}.
    let h = 0.75;
    let fine = fbm(h, 1 << 12, 20, 1);
    let err = |factor: usize| {
        let p = fine.subsample(factor).unwrap();
        p.rows()
            .map(|r| (pathwise_integral(r, r).unwrap() - 0.5 * r[r.len() - 1].powi(2)).abs())
            .sum::<f64>()
    };
    let errors: Vec<f64> = [16, 4, 1].into_iter().map(err).collect();
    let rate = (errors[0] / errors[2]).ln() / 16f64.ln();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!((rate - (2.0 * h - 1.0)).abs() < 0.1, "rate {rate}");
}

#[test]
fn frictionless_diffusion_arbitrage() {
    let w = gen_brownian(1.0, 1024, 200, 3).unwrap();
    let r = diffusion_arb_demo(&MARKET, &w, &TaxSchedule::frictionless(2)).unwrap();
    assert!(r.pass, "{:?}", r.statistics);
    assert!(r.statistics["gain_relative_error"] < 0.05);
    assert_eq!(r.statistics["net_negative_fraction"], 0.0);
}

#[test]
fn taxed_diffusion_arbitrage_can_lose() {
    let w = gen_brownian(1.0, 1024, 500, 3).unwrap();
    let r = diffusion_arb_demo(&MARKET, &w, &TaxSchedule::uniform(2, 0.5).unwrap()).unwrap();
    assert!(r.pass);
    assert!(r.ci_low > 0.0, "{} {}", r.ci_low, r.ci_high);
    assert_eq!(r.statistics["zero_solution_residual"], 0.0);
}

#[test]
fn diffusion_demo_needs_the_shared_volatility_market() {
    let w = gen_brownian(1.0, 16, 2, 3).unwrap();
    let ordered = TwoAssetDiffusion::Ordered {
        mu: [0.1, 0.05],
        sigma: [0.3, 0.1],
    };
    assert!(diffusion_arb_demo(&ordered, &w, &TaxSchedule::frictionless(2)).is_err());
}

#[test]
fn mixed_market_arbitrage_with_and_without_tax() {
    let w = gen_brownian(1.0, 1024, 500, 4).unwrap();
    let h = fbm(0.7, 1024, 500, 4);
    let prices = price_mixed_market(&MIXED, &w, &h).unwrap();
    let free = mixed_arb_demo(&MIXED, &prices, &TaxSchedule::frictionless(2)).unwrap();
    assert!(free.pass, "{:?}", free.statistics);
    let taxed = mixed_arb_demo(&MIXED, &prices, &TaxSchedule::uniform(2, 0.5).unwrap()).unwrap();
    assert!(taxed.pass && taxed.ci_low > 0.0, "{:?}", taxed.statistics);
}

#[test]
fn shiryaev_arbitrage_frictionless_and_taxed() {
    let driver = fbm(0.7, 1024, 200, 5);
    let free = shiryaev_demo(&driver, 0.0).unwrap();
    assert!(free.pass);
    assert_eq!(free.statistics["initial_value_max_abs"], 0.0);
    assert_eq!(free.statistics["terminal_positive_fraction"], 1.0);
    let taxed = shiryaev_demo(&driver, 1.0).unwrap();
    assert!(taxed.pass && taxed.ci_high < 1.0);
}

#[test]
fn fsquare_probability_is_interior_under_tax() {
    let driver = gen_hermite(&HermiteSpec::new(0.7, 2).unwrap(), 1.0, 256, 1000, 6).unwrap();
    let free = fsquare_demo(&driver, 1.0, 0.0).unwrap();
    assert!(free.pass);
    assert_eq!(free.statistics["probability"], 1.0);
    let taxed = fsquare_demo(&driver, 1.0, 0.5).unwrap();
    assert!(taxed.pass && taxed.ci_low > 0.0 && taxed.ci_high < 1.0, "{:?}", taxed.statistics);
}

#[test]
fn f_strategy_must_vanish_at_the_start() {
    let driver = fbm(0.7, 16, 2, 7);
    assert!(f_strategy_demo(&Quadratic { center: 2.0 }, &driver, 1.0, 0.1, 16).is_err());
    assert!(f_strategy_demo(&Quadratic { center: 1.0 }, &driver, 1.0, -0.1, 16).is_err());
    let ok = f_strategy_demo(&Quadratic { center: 1.0 }, &driver, 1.0, 0.0, 16).unwrap();
    assert_eq!(ok.cost, vec![0.0; 17]);
}
