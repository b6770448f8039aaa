//! The `hermite` command-line tool.
//!
//! Exit codes: 0 success or claim confirmed, 1 claim check failed, 2 usage
//! or parameter error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hermite_core::hermite::DEFAULT_APPROX_FACTOR;
use hermite_core::market::{price_mixed_market, MixedMarket, TwoAssetDiffusion};
use hermite_core::pde::{black_scholes, effective_volatility, solve_tax_bsm, OptionKind, Payoff, PdeGrid, TerminalClaim};
use hermite_core::{HermiteSpec, MixedComponent, MixedHermiteSpec, Normalization, SamplePath, TaxSchedule};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::demos::{diffusion_arb_demo, fsquare_demo, mixed_arb_demo, shiryaev_demo, DemoReport};
use crate::error::{usage, Error, Result};
use crate::io;
use crate::process::{gen_brownian, gen_fbm, gen_hermite, gen_hou, gen_mixed, HouSpec};
use crate::stats;

pub const DEFAULT_SEED: u64 = 42;
const LEVEL: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "hermite", version, about = "Hermite-process markets: simulation, statistics, arbitrage-tax demos and pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate driver paths to CSV with a JSON sidecar.
    Simulate(SimulateArgs),
    /// Check a path file against the theory.
    Stats(StatsArgs),
    /// Run an arbitrage or arbitrage-tax demonstration.
    ArbDemo(ArbDemoArgs),
    /// Price a claim with the tax-adjusted Black-Scholes equation.
    Price(PriceArgs),
    /// Regenerate a path file from its sidecar.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessArg {
    Fbm,
    Hermite,
    Mixed,
    Hou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationArg {
    Empirical,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub process: ProcessArg,
    #[arg(long)]
    pub hurst: f64,
    #[arg(long, default_value_t = 1)]
    pub rank: u32,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, env = "HERMITE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_APPROX_FACTOR)]
    pub approx_factor: usize,
    #[arg(long, value_enum, default_value = "empirical")]
    pub normalization: NormalizationArg,
    /// Mixture weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Mixture ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Vec<u32>,
    /// HOU mean-reversion rate.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// HOU scale.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// HOU history truncation, default 20/λ.
    #[arg(long)]
    pub history: Option<f64>,
}

/// Sidecar written next to every simulated path file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub tool_version: String,
    pub command: String,
    pub config: SimulateArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckArg {
    Cov,
    Selfsim,
    Lrd,
    Qv,
    Hurst,
    Normality,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub check: CheckArg,
    /// Hurst index; read from the sidecar when omitted.
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Hermite rank; read from the sidecar when omitted, else 1.
    #[arg(long)]
    pub rank: Option<u32>,
    /// Sub-grid spacing in steps for the quadratic-variation check.
    #[arg(long, default_value_t = 1)]
    pub block: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Shiryaev,
    Fsquare,
    Diffusion,
    Mixed,
}

#[derive(Debug, Clone, Args)]
pub struct ArbDemoArgs {
    #[arg(long, value_enum)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0.0)]
    pub tax: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, env = "HERMITE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.7)]
    pub hurst: f64,
    /// Rank of the Hermite driver in the single-asset cases.
    #[arg(long, default_value_t = 1)]
    pub rank: u32,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// TOML file with market parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayoffArg {
    Call,
    Put,
    Power,
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    #[arg(long, value_enum)]
    pub payoff: PayoffArg,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    /// Spot price; defaults to the strike.
    #[arg(long)]
    pub spot: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub maturity: f64,
    /// Log-price nodes.
    #[arg(long, default_value_t = 801)]
    pub grid: usize,
    #[arg(long, default_value_t = 400)]
    pub time_steps: usize,
    /// Exponent of the power claim.
    #[arg(long, default_value_t = 2.0)]
    pub exponent: f64,
    /// Surface CSV `t,s,value`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub meta: PathBuf,
    /// Output file; defaults to the one recorded in the sidecar.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Market parameters for `arb-demo --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub s0: f64,
    pub diffusion: DiffusionConfig,
    pub mixed: MixedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionConfig {
    pub mu: f64,
    pub m: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixedConfig {
    pub r: f64,
    pub b: f64,
    pub rho: f64,
    pub mu: f64,
    pub sigma: f64,
    pub sigma_h: f64,
    pub initial: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            s0: 1.0,
            diffusion: DiffusionConfig::default(),
            mixed: MixedConfig::default(),
        }
    }
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            mu: 0.08,
            m: 0.03,
            sigma: 0.2,
        }
    }
}

impl Default for MixedConfig {
    fn default() -> Self {
        Self {
            r: 0.03,
            b: 0.2,
            rho: 0.3,
            mu: 0.05,
            sigma: 0.2,
            sigma_h: 0.1,
            initial: 1.0,
        }
    }
}

impl DemoConfig {
    pub fn load(file: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(file)?;
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Simulated paths for a `simulate` configuration.
pub fn simulate_paths(cfg: &SimulateArgs) -> Result<SamplePath> {
    let normalization = match cfg.normalization {
        NormalizationArg::Empirical => Normalization::Empirical,
        NormalizationArg::Analytic => Normalization::Analytic,
    };
    let spec = || -> Result<HermiteSpec> {
        Ok(HermiteSpec::new(cfg.hurst, cfg.rank)?
            .with_approx_factor(cfg.approx_factor)?
            .with_normalization(normalization)?)
    };
    if cfg.paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    match cfg.process {
        ProcessArg::Fbm => {
            if cfg.rank != 1 {
                return Err(usage("--process fbm takes no --rank other than 1"));
            }
            gen_fbm(&spec()?, cfg.horizon, cfg.steps, cfg.paths, cfg.seed)
        }
        ProcessArg::Hermite => gen_hermite(&spec()?, cfg.horizon, cfg.steps, cfg.paths, cfg.seed),
        ProcessArg::Mixed => {
            if cfg.weights.is_empty() || cfg.weights.len() != cfg.ranks.len() {
                return Err(usage("--process mixed needs --weights and --ranks of equal length"));
            }
            let components = cfg
                .weights
                .iter()
                .zip(&cfg.ranks)
                .map(|(&weight, &rank)| MixedComponent { weight, rank })
                .collect();
            let mixed = MixedHermiteSpec::new(cfg.hurst, components)?
                .with_approx_factor(cfg.approx_factor)?
                .with_normalization(normalization)?;
            gen_mixed(&mixed, cfg.horizon, cfg.steps, cfg.paths, cfg.seed)
        }
        ProcessArg::Hou => {
            let hou = match cfg.history {
                Some(t0) => HouSpec::with_history(cfg.lambda, cfg.sigma, t0)?,
                None => HouSpec::new(cfg.lambda, cfg.sigma)?,
            };
            gen_hou(&hou, &spec()?, cfg.horizon, cfg.steps, cfg.paths, cfg.seed)
        }
    }
}

fn write_simulation(cfg: &SimulateArgs, out: &Path) -> Result<()> {
    let path = simulate_paths(cfg)?;
    io::save_paths(&path, out)?;
    let meta = PathMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "simulate".into(),
        config: SimulateArgs {
            out: out.to_path_buf(),
            ..cfg.clone()
        },
    };
    io::write_json(&meta, &io::sidecar_path(out))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    write_simulation(args, &args.out)?;
    eprintln!(
        "wrote {} paths of {} steps to {} (seed {})",
        args.paths,
        args.steps,
        args.out.display(),
        args.seed
    );
    Ok(0)
}

fn cmd_replay(args: &ReplayArgs) -> Result<i32> {
    let meta: PathMeta = io::read_json(&args.meta)?;
    let out = args.out.clone().unwrap_or_else(|| meta.config.out.clone());
    let path = simulate_paths(&meta.config)?;
    io::save_paths(&path, &out)?;
    eprintln!("regenerated {} (seed {})", out.display(), meta.config.seed);
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub check: CheckArg,
    pub file: String,
    pub paths: usize,
    pub steps: usize,
    pub hurst: f64,
    pub rank: u32,
    pub statistic: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub variance: VarianceCheck,
    pub details: serde_json::Value,
}

/// Second moment at the horizon against `T^{2H}`, within four standard
/// errors of the path average.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceCheck {
    pub sample: f64,
    pub target: f64,
    pub std_error: f64,
    pub pass: bool,
}

pub fn variance_check(path: &SamplePath, hurst: f64) -> VarianceCheck {
    let sq: Vec<f64> = path.terminal().iter().map(|x| x * x).collect();
    let n = sq.len() as f64;
    let sample = sq.iter().sum::<f64>() / n;
    let spread = if sq.len() > 1 {
        (sq.iter().map(|v| (v - sample).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let std_error = spread / n.sqrt();
    let target = path.horizon().powf(2.0 * hurst);
    VarianceCheck {
        sample,
        target,
        std_error,
        pass: (sample - target).abs() <= 4.0 * std_error,
    }
}

fn cmd_stats(args: &StatsArgs) -> Result<i32> {
    let sidecar = io::sidecar_path(&args.input);
    let meta: Option<PathMeta> = if sidecar.exists() {
        Some(io::read_json(&sidecar)?)
    } else {
        None
    };
    let hurst = args
        .hurst
        .or(meta.as_ref().map(|m| m.config.hurst))
        .ok_or_else(|| usage("--hurst is required when the file has no sidecar"))?;
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(usage(format!("--hurst must lie in (1/2, 1), got {hurst}")));
    }
    let rank = args.rank.unwrap_or_else(|| match &meta {
        Some(m) if m.config.process == ProcessArg::Mixed => m.config.ranks.iter().copied().max().unwrap_or(1),
        Some(m) if m.config.process != ProcessArg::Fbm => m.config.rank,
        _ => 1,
    });
    let seed = meta.as_ref().map_or(0, |m| m.config.seed);
    let path = io::load_paths(&args.input, seed)?;
    let report = run_check(args.check, &path, hurst, rank, args.block, &args.input)?;
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(out) => std::fs::write(out, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(if report.pass { 0 } else { 1 })
}

pub fn run_check(
    check: CheckArg,
    path: &SamplePath,
    hurst: f64,
    rank: u32,
    block: usize,
    file: &Path,
) -> Result<StatsReport> {
    let variance = variance_check(path, hurst);
    let gaussian_expected = |h: f64| rank == 1 && h < 0.75;
    let (statistic, target, tolerance, pass, details) = match check {
        CheckArg::Cov => {
            let points = 8.min(path.steps());
            let c = stats::covariance_check(path, hurst, points)?;
            let pass = c.passes(3.0);
            (c.max_z, 0.0, 3.0, pass, json!({ "max_deviation": c.max_deviation, "entries": c.entries }))
        }
        CheckArg::Selfsim => {
            if !path.steps().is_multiple_of(2) {
                return Err(usage("self-similarity check needs an even number of steps"));
            }
            let r = stats::self_similarity(path, hurst, 2.0)?;
            (r.p_value, LEVEL, LEVEL, r.p_value > LEVEL, json!({ "ks_statistic": r.statistic, "scale": 2.0 }))
        }
        CheckArg::Lrd => {
            let lags: Vec<usize> = (2..).map(|j| 1usize << j).take_while(|&l| l <= path.steps() / 16).collect();
            if lags.len() < 3 {
                return Err(usage("LRD check needs at least 128 steps"));
            }
            let fit = stats::lrd_slope(path, &lags)?;
            let target = 2.0 * hurst - 2.0;
            (fit.slope, target, 0.2, (fit.slope - target).abs() <= 0.2, json!({ "lags": lags, "fit": fit }))
        }
        CheckArg::Qv => {
            let qv = stats::centered_qv(path, block, hurst)?;
            let jb = stats::jarque_bera(&qv.normalized());
            let gaussian = !jb.rejects(LEVEL);
            let expected = gaussian_expected(hurst);
            (
                jb.p_value,
                LEVEL,
                LEVEL,
                gaussian == expected,
                json!({
                    "gaussian_limit": if gaussian { "pass" } else { "fail" },
                    "gaussian_expected": expected,
                    "jarque_bera": jb.statistic,
                    "normalizer": qv.normalizer,
                    "spacing": qv.spacing,
                }),
            )
        }
        CheckArg::Hurst => {
            let est = stats::estimate_hurst(path)?;
            (est.hurst, hurst, 0.05, (est.hurst - hurst).abs() <= 0.05, json!({ "std_error": est.std_error }))
        }
        CheckArg::Normality => {
            let jb = stats::jarque_bera(&path.terminal());
            let gaussian = !jb.rejects(LEVEL);
            let expected = rank == 1;
            (
                jb.p_value,
                LEVEL,
                LEVEL,
                gaussian == expected,
                json!({
                    "gaussian": gaussian,
                    "gaussian_expected": expected,
                    "jarque_bera": jb.statistic,
                    "moments": stats::moments(&path.terminal()),
                }),
            )
        }
    };
    Ok(StatsReport {
        check,
        file: file.display().to_string(),
        paths: path.num_paths(),
        steps: path.steps(),
        hurst,
        rank,
        statistic,
        target,
        tolerance,
        pass: pass && variance.pass,
        variance,
        details,
    })
}

pub fn run_demo(args: &ArbDemoArgs) -> Result<DemoReport> {
    let cfg = match &args.config {
        Some(file) => DemoConfig::load(file)?,
        None => DemoConfig::default(),
    };
    if args.paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    if !(args.tax >= 0.0) {
        return Err(usage(format!("--tax must be nonnegative, got {}", args.tax)));
    }
    let hermite = || -> Result<SamplePath> {
        let spec = HermiteSpec::new(args.hurst, args.rank)?;
        if args.rank == 1 {
            gen_fbm(&spec, args.horizon, args.steps, args.paths, args.seed)
        } else {
            gen_hermite(&spec, args.horizon, args.steps, args.paths, args.seed)
        }
    };
    let pair_tax = TaxSchedule::uniform(2, args.tax)?;
    match args.case {
        CaseArg::Shiryaev => shiryaev_demo(&hermite()?, args.tax),
        CaseArg::Fsquare => fsquare_demo(&hermite()?, cfg.s0, args.tax),
        CaseArg::Diffusion => {
            let d = cfg.diffusion;
            let market = TwoAssetDiffusion::SharedVolatility {
                mu: d.mu,
                m: d.m,
                sigma: d.sigma,
            };
            let w = gen_brownian(args.horizon, args.steps, args.paths, args.seed)?;
            diffusion_arb_demo(&market, &w, &pair_tax)
        }
        CaseArg::Mixed => {
            let m = cfg.mixed;
            let market = MixedMarket {
                r: m.r,
                b: m.b,
                rho: m.rho,
                mu: m.mu,
                sigma: m.sigma,
                sigma_h: m.sigma_h,
                hurst: args.hurst,
                initial: m.initial,
            };
            let w = gen_brownian(args.horizon, args.steps, args.paths, args.seed)?;
            let h = gen_fbm(&HermiteSpec::fbm(args.hurst)?, args.horizon, args.steps, args.paths, args.seed)?;
            let prices = price_mixed_market(&market, &w, &h)?;
            mixed_arb_demo(&market, &prices, &pair_tax)
        }
    }
}

fn cmd_arb_demo(args: &ArbDemoArgs) -> Result<i32> {
    let report = run_demo(args)?;
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(out) => std::fs::write(out, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(if report.pass { 0 } else { 1 })
}

#[derive(Debug, Clone, Serialize)]
pub struct PriceReport {
    pub payoff: String,
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub sigma: f64,
    pub tax: f64,
    pub maturity: f64,
    pub effective_volatility: f64,
    pub price: f64,
    pub closed_form: Option<f64>,
}

pub fn run_price(args: &PriceArgs) -> Result<(PriceReport, hermite_core::pde::ValueSurface)> {
    let spot = args.spot.unwrap_or(args.strike);
    let sigma_eff = effective_volatility(args.sigma, args.rate, args.tax)?;
    let (payoff, kind) = match args.payoff {
        PayoffArg::Call => (Payoff::Call { strike: args.strike }, Some(OptionKind::Call)),
        PayoffArg::Put => (Payoff::Put { strike: args.strike }, Some(OptionKind::Put)),
        PayoffArg::Power => (
            Payoff::Power {
                exponent: args.exponent,
            },
            None,
        ),
    };
    let label = payoff.label().to_string();
    let claim = TerminalClaim::new(payoff, args.maturity)?;
    let grid = PdeGrid::around(spot, args.strike, sigma_eff, args.maturity, args.grid, args.time_steps)?;
    let surface = solve_tax_bsm(&claim, args.rate, args.sigma, args.tax, &grid)?;
    let price = surface.price(spot)?;
    let closed_form = kind.map(|k| black_scholes(k, spot, args.strike, args.rate, sigma_eff, args.maturity));
    Ok((
        PriceReport {
            payoff: label,
            spot,
            strike: args.strike,
            rate: args.rate,
            sigma: args.sigma,
            tax: args.tax,
            maturity: args.maturity,
            effective_volatility: sigma_eff,
            price,
            closed_form,
        },
        surface,
    ))
}

fn cmd_price(args: &PriceArgs) -> Result<i32> {
    let (report, surface) = match run_price(args) {
        Err(Error::Core(hermite_core::Error::IllPosed(msg))) => {
            eprintln!("error: ill-posed pricing problem: {msg}");
            return Ok(1);
        }
        other => other?,
    };
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        writeln!(w, "t,s,value")?;
        for (k, t) in surface.times.iter().enumerate() {
            for (s, v) in surface.prices.iter().zip(surface.row(k)) {
                writeln!(w, "{},{},{}", io::fmt_f64(*t), io::fmt_f64(*s), io::fmt_f64(*v))?;
            }
        }
        w.flush()?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::ArbDemo(a) => cmd_arb_demo(a),
        Command::Price(a) => cmd_price(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
