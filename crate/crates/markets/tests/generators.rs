use hermite_core::{HermiteSpec, MixedComponent, MixedHermiteSpec, SamplePath};
use hermite_markets::stats::moments;
use hermite_markets::{gen_brownian, gen_fbm, gen_fgn, gen_hermite, gen_hou, gen_mixed, HouSpec};
use statrs::function::gamma::gamma;

fn second_moment(xs: &[f64]) -> (f64, f64) {
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let m = moments(&sq);
    (m.mean, (m.variance / sq.len() as f64).sqrt())
}

fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
}

#[test]
fn same_seed_same_paths() {
    let spec = HermiteSpec::new(0.7, 2).unwrap();
    let a = gen_hermite(&spec, 1.0, 64, 8, 7).unwrap();
    let b = gen_hermite(&spec, 1.0, 64, 8, 7).unwrap();
    let c = gen_hermite(&spec, 1.0, 64, 8, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values(), c.values());
}

#[test]
fn path_index_does_not_depend_on_batch_size() {
    let spec = HermiteSpec::fbm(0.8).unwrap();
    let small = gen_fbm(&spec, 1.0, 128, 3, 5).unwrap();
    let large = gen_fbm(&spec, 1.0, 128, 20, 5).unwrap();
    for i in 0..3 {
        assert_eq!(small.path(i), large.path(i));
    }
}

#[test]
fn one_component_mixture_is_the_hermite_process() {
    let mixed = MixedHermiteSpec::new(0.7, vec![MixedComponent { weight: 1.0, rank: 2 }]).unwrap();
    let a = gen_mixed(&mixed, 1.0, 64, 4, 11).unwrap();
    let b = gen_hermite(&HermiteSpec::new(0.7, 2).unwrap(), 1.0, 64, 4, 11).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn mixture_weights_must_have_unit_norm() {
    let bad = MixedHermiteSpec::new(
        0.7,
        vec![MixedComponent { weight: 0.6, rank: 1 }, MixedComponent { weight: 0.6, rank: 2 }],
    );
    assert!(bad.is_err());
}

#[test]
fn drivers_start_at_zero() {
    let paths: Vec<SamplePath> = vec![
        gen_fbm(&HermiteSpec::fbm(0.6).unwrap(), 2.0, 32, 5, 1).unwrap(),
        gen_hermite(&HermiteSpec::new(0.9, 3).unwrap(), 2.0, 32, 5, 1).unwrap(),
        gen_brownian(2.0, 32, 5, 1).unwrap(),
    ];
    for p in &paths {
        assert!(p.column(0).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn terminal_variance_scales_with_the_horizon() {
    for (rank, horizon) in [(1, 1.0f64), (2, 1.0), (3, 2.0)] {
        let spec = HermiteSpec::new(0.75, rank).unwrap();
        let p = gen_hermite(&spec, horizon, 64, 4000, 100 + rank as u64).unwrap();
        let (m, se) = second_moment(&p.terminal());
        let target = horizon.powf(1.5);
        assert!((m - target).abs() <= 4.0 * se, "rank {rank}: {m} vs {target} (se {se})");
    }
}

#[test]
fn brownian_variance_is_time() {
    let w = gen_brownian(3.0, 30, 5000, 2).unwrap();
    for k in [10, 30] {
        let (m, se) = second_moment(&w.column(k));
        assert!((m - w.time(k)).abs() <= 4.0 * se, "{m} at t = {}", w.time(k));
    }
}

#[test]
fn fgn_autocovariance_slope() {
    let h = 0.9;
    let lags = [4usize, 8, 16, 32];
    let mut cov = vec![0.0; lags.len()];
    let (reps, n) = (40, 1 << 14);
    for seed in 0..reps {
        let x = gen_fgn(h, n, seed).unwrap();
        for (c, &lag) in cov.iter_mut().zip(&lags) {
            *c += (0..n - lag).map(|k| x[k] * x[k + lag]).sum::<f64>() / (n - lag) as f64 / reps as f64;
        }
    }
    let lx: Vec<f64> = lags.iter().map(|&l| (l as f64).ln()).collect();
    let sample = linear_fit_slope(&lx, &cov.iter().map(|c| c.ln()).collect::<Vec<_>>());
    let exact = linear_fit_slope(&lx, &lags.iter().map(|&l| fgn_autocov(h, l).ln()).collect::<Vec<_>>());
    assert!((sample - exact).abs() <= 0.15, "{sample} vs {exact}");
}

fn linear_fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn fgn_rejects_an_invalid_hurst_index() {
    assert!(gen_fgn(1.2, 16, 0).is_err());
}

#[test]
fn hou_without_noise_is_zero() {
    let spec = HouSpec::new(1.0, 0.0).unwrap();
    let p = gen_hou(&spec, &HermiteSpec::new(0.7, 2).unwrap(), 1.0, 50, 3, 4).unwrap();
    assert!(p.values().iter().all(|v| *v == 0.0));
}

#[test]
fn hou_rejects_bad_parameters() {
    assert!(HouSpec::new(0.0, 1.0).is_err());
    assert!(HouSpec::new(1.0, -1.0).is_err());
    assert!(HouSpec::with_history(1.0, 1.0, 0.0).is_err());
}

#[test]
fn hou_stationary_variance() {
    // σ²H(2H-1)∫∫_{[0,∞)²} e^{-λ(u+v)}|u-v|^{2H-2} du dv = σ²HΓ(2H)λ^{-2H}.
    let (h, lambda, sigma) = (0.7f64, 1.0f64, 1.0);
    let exact = sigma * sigma * h * gamma(2.0 * h) * lambda.powf(-2.0 * h);
    let fbm = HermiteSpec::fbm(h).unwrap().with_approx_factor(1).unwrap();
    let p = gen_hou(&HouSpec::new(lambda, sigma).unwrap(), &fbm, 1.0, 100, 5000, 9).unwrap();
    let var = moments(&p.terminal()).variance;
    assert!((var - exact).abs() / exact <= 0.1, "{var} vs {exact}");
}

#[test]
fn hou_long_range_dependence() {
    let (h, dt) = (0.7, 0.1);
    let fbm = HermiteSpec::fbm(h).unwrap().with_approx_factor(1).unwrap();
    let p = gen_hou(&HouSpec::new(1.0, 1.0).unwrap(), &fbm, 100.0, 1000, 2000, 10).unwrap();
    let lags = [5.0, 10.0];
    let cov: Vec<f64> = lags
        .iter()
        .map(|s| {
            let lag = (s / dt) as usize;
            let (mut sum, mut count) = (0.0, 0usize);
            for r in p.rows() {
                for k in (0..r.len() - lag).step_by(10) {
                    sum += r[k] * r[k + lag];
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect();
    let slope = (cov[1] / cov[0]).ln() / 2f64.ln();
    assert!((slope - (2.0 * h - 2.0)).abs() <= 0.3, "slope {slope}, cov {cov:?}");
}
