//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimation::{fit_lag, goodness_of_fit, Objective};
use crate::io::{read_series_csv, write_prediction_csv, write_series_csv, CsvSchema, CsvUnits};
use crate::model::{
    equality_residual, predict_full, predict_simple, spread, EconomyPath, ModelParams, NMode, RatePair,
};
use crate::series::{align, TimeSeries};
use crate::synthetic::{generate_path, InflationProfile, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(
    name = "spread-inflation",
    version,
    about = "Inflation from the long-short interest-rate spread"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Long minus short rate.
    Spread(SpreadArgs),
    /// Predicted inflation with MASKED column.
    Predict(PredictArgs),
    /// Grid search for the delay against realized inflation.
    FitLag(FitLagArgs),
    /// Write a synthetic economy as CSV files.
    Simulate(SimulateArgs),
    /// Income-identity residual statistics for a simulated economy.
    Check(CheckArgs),
    /// Score a prediction against realized inflation.
    Backtest(BacktestArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitsArg {
    Percent,
    Fraction,
}

impl From<UnitsArg> for CsvUnits {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Percent => CsvUnits::Percent,
            UnitsArg::Fraction => CsvUnits::Fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Rmse,
    Pearson,
}

#[derive(Debug, Args)]
struct RateFiles {
    /// Long-term rate CSV.
    #[arg(long)]
    long: PathBuf,
    /// Short-term rate CSV.
    #[arg(long)]
    short: PathBuf,
    /// Units of rate and inflation files, read and written.
    #[arg(long, value_enum, default_value = "percent")]
    units: UnitsArg,
}

#[derive(Debug, Args)]
struct SpreadArgs {
    #[command(flatten)]
    rates: RateFiles,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Money supply CSV (levels).
    #[arg(long)]
    money: Option<PathBuf>,
    /// Output (objects per year) CSV, dated at t + lag. Requires --money.
    #[arg(long = "output-series")]
    output_series: Option<PathBuf>,
    #[arg(long, default_value_t = 13)]
    window: usize,
    #[arg(long, default_value_t = 1e-4)]
    floor: f64,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    rates: RateFiles,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 9)]
    lag: usize,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct FitLagArgs {
    #[command(flatten)]
    rates: RateFiles,
    #[command(flatten)]
    model: ModelArgs,
    /// Realized inflation CSV.
    #[arg(long)]
    actual: PathBuf,
    /// Inclusive lag range FROM:TO in samples.
    #[arg(long, default_value = "0:24")]
    grid: String,
    #[arg(long, value_enum, default_value = "rmse")]
    objective: ObjectiveArg,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// constant:RATE, hump:BASE,PEAK,RISE,FALL or piecewise:YEARS:RATE,...
    #[arg(long)]
    profile: String,
    #[arg(long, default_value_t = 0.03)]
    i0: f64,
    #[arg(long, default_value_t = 10.0)]
    years: f64,
    #[arg(long, default_value_t = 12)]
    freq: u32,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    lag: usize,
    #[arg(long = "money-growth", default_value_t = 0.0)]
    money_growth: f64,
    #[arg(long = "output-growth", default_value_t = 0.0)]
    output_growth: f64,
    /// Cost/price ratio.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Banker income over manufacturer income.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long = "short-rate", default_value_t = 0.02)]
    short_rate: f64,
    #[arg(long, value_enum, default_value = "percent")]
    units: UnitsArg,
    #[arg(long = "o-prefix")]
    prefix: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long = "path-prefix")]
    prefix: PathBuf,
    #[arg(long, default_value_t = 0)]
    lag: usize,
    /// Exit 2 when the residual standard deviation exceeds 1e-8.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value = "percent")]
    units: UnitsArg,
}

#[derive(Debug, Args)]
struct BacktestArgs {
    #[command(flatten)]
    rates: RateFiles,
    #[arg(long)]
    money: PathBuf,
    #[arg(long = "output-series")]
    output_series: Option<PathBuf>,
    #[arg(long)]
    actual: PathBuf,
    #[arg(long, default_value_t = 9)]
    lag: usize,
    #[arg(long, default_value_t = 13)]
    window: usize,
    #[arg(long, default_value_t = 1e-4)]
    floor: f64,
    #[arg(long = "o-report")]
    report: PathBuf,
}

const STRICT_STD: f64 = 1e-8;

/// Rewrites the single-dash long spellings `-o-prefix` and `-o-report`.
fn normalize(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    args.into_iter()
        .map(|a| match a.to_str() {
            Some("-o-prefix") => "--o-prefix".into(),
            Some("-o-report") => "--o-report".into(),
            _ => a,
        })
        .collect()
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let cli = match Cli::try_parse_from(normalize(args.into_iter().map(Into::into))) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Spread(a) => cmd_spread(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::FitLag(a) => cmd_fit_lag(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Backtest(a) => cmd_backtest(a, out),
    }
}

fn read(path: &Path, units: CsvUnits, out: &mut dyn Write) -> Result<TimeSeries<f64>> {
    let parsed = read_series_csv::<f64>(path, &CsvSchema::with_units(units))?;
    if !parsed.interpolated.is_empty() {
        writeln!(
            out,
            "{}: interpolated {} missing month(s) starting {}",
            path.display(),
            parsed.interpolated.len(),
            parsed.interpolated[0]
        )?;
    }
    Ok(parsed.series)
}

fn read_rates(files: &RateFiles, out: &mut dyn Write) -> Result<RatePair<f64>> {
    let units = files.units.into();
    RatePair::new(read(&files.long, units, out)?, read(&files.short, units, out)?)
}

/// Money supply and, optionally, output.
type Levels = (Option<TimeSeries<f64>>, Option<TimeSeries<f64>>);

fn read_levels(money: Option<&Path>, output: Option<&Path>, out: &mut dyn Write) -> Result<Levels> {
    if money.is_none() && output.is_some() {
        return Err(Error::Usage("--output-series requires --money".into()));
    }
    let m = money.map(|p| read(p, CsvUnits::Fraction, out)).transpose()?;
    let n = output.map(|p| read(p, CsvUnits::Fraction, out)).transpose()?;
    Ok((m, n))
}

fn params(lag: usize, window: usize, floor: f64, explicit_n: bool) -> ModelParams<f64> {
    ModelParams {
        lag_samples: lag,
        smooth_window: window,
        spread_floor: floor,
        n_mode: if explicit_n {
            NMode::ExplicitN
        } else {
            NMode::FoldedIntoM
        },
    }
}

fn cmd_spread(a: SpreadArgs, out: &mut dyn Write) -> Result<i32> {
    let rates = read_rates(&a.rates, out)?;
    let s = spread(&rates)?;
    write_series_csv(&s, &a.output, a.rates.units.into())?;
    writeln!(
        out,
        "wrote {} samples {}..{} to {}",
        s.len(),
        s.start(),
        s.end(),
        a.output.display()
    )?;
    Ok(0)
}

fn cmd_predict(a: PredictArgs, out: &mut dyn Write) -> Result<i32> {
    let rates = read_rates(&a.rates, out)?;
    let (money, output) = read_levels(a.model.money.as_deref(), a.model.output_series.as_deref(), out)?;
    let p = params(a.lag, a.model.window, a.model.floor, output.is_some());
    let result = match &money {
        Some(m) => predict_full(&rates, m, output.as_ref(), &p)?,
        None => predict_simple(&rates, &p)?,
    };
    write_prediction_csv(&result, &a.output, a.rates.units.into())?;
    writeln!(
        out,
        "wrote {} samples {}..{} ({} masked in {} span(s)) to {}",
        result.inflation.len(),
        result.inflation.start(),
        result.inflation.end(),
        result.coverage.masked_count,
        result.coverage.masked_spans.len(),
        a.output.display()
    )?;
    Ok(0)
}

fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Usage(format!("lag grid must look like FROM:TO, got {spec:?}"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_fit_lag(a: FitLagArgs, out: &mut dyn Write) -> Result<i32> {
    let lags = parse_grid(&a.grid)?;
    let units: CsvUnits = a.rates.units.into();
    let rates = read_rates(&a.rates, out)?;
    let (money, output) = read_levels(a.model.money.as_deref(), a.model.output_series.as_deref(), out)?;
    let actual = read(&a.actual, units, out)?;
    let objective = match a.objective {
        ObjectiveArg::Rmse => Objective::Rmse,
        ObjectiveArg::Pearson => Objective::Pearson,
    };
    let p = params(0, a.model.window, a.model.floor, output.is_some());
    let fit = fit_lag(&rates, money.as_ref(), output.as_ref(), &actual, &lags, &p, objective)?;

    let mut w = csv::Writer::from_path(&a.output)?;
    w.write_record(["LAG", "RMSE", "PEARSON", "SIGN_AGREEMENT", "N"])?;
    for s in &fit.grid {
        w.write_record([
            s.lag.to_string(),
            s.metrics.rmse.to_string(),
            fmt_opt(s.metrics.pearson),
            s.metrics.sign_agreement.to_string(),
            s.metrics.n_points.to_string(),
        ])?;
    }
    w.flush()?;
    if !fit.skipped.is_empty() {
        writeln!(out, "skipped lags (too few comparable points): {:?}", fit.skipped)?;
    }
    let best = fit.best();
    writeln!(
        out,
        "best_lag={} rmse={} pearson={} n={}",
        fit.best_lag,
        best.metrics.rmse,
        fmt_opt(best.metrics.pearson),
        best.metrics.n_points
    )?;
    Ok(0)
}

fn parse_numbers(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("not a number: {x:?}")))
        })
        .collect()
}

fn parse_profile(spec: &str) -> Result<InflationProfile<f64>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("profile must look like KIND:ARGS, got {spec:?}")))?;
    let profile = match kind.trim().to_ascii_lowercase().as_str() {
        "constant" => match parse_numbers(rest)?.as_slice() {
            [r] => InflationProfile::Constant(*r),
            _ => return Err(Error::Usage("constant profile takes one rate".into())),
        },
        "hump" => match parse_numbers(rest)?.as_slice() {
            [base, peak, rise, fall] => InflationProfile::Hump {
                base: *base,
                peak: *peak,
                rise_years: *rise,
                fall_years: *fall,
            },
            _ => return Err(Error::Usage("hump profile takes BASE,PEAK,RISE,FALL".into())),
        },
        "piecewise" => {
            let segments = rest
                .split(',')
                .map(|seg| {
                    let (d, r) = seg
                        .split_once(':')
                        .ok_or_else(|| Error::Usage(format!("segment must be YEARS:RATE, got {seg:?}")))?;
                    let d = parse_numbers(d)?[0];
                    let r = parse_numbers(r)?[0];
                    Ok((d, r))
                })
                .collect::<Result<Vec<_>>>()?;
            InflationProfile::Piecewise(segments)
        }
        other => return Err(Error::Usage(format!("unknown profile kind {other:?}"))),
    };
    profile.validate()?;
    Ok(profile)
}

/// File names written by `simulate` and read by `check`.
fn path_file(prefix: &Path, name: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(format!("_{name}.csv"));
    PathBuf::from(s)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    if !(a.i0 > 0.0 && a.i0.is_finite()) {
        return Err(Error::Usage("--i0 must be positive".into()));
    }
    let spec = SyntheticSpec {
        inflation_profile: parse_profile(&a.profile)?,
        lag_samples: a.lag,
        money_growth: a.money_growth,
        output_growth: a.output_growth,
        cost_price_ratio: a.alpha,
        proportionality: a.k,
        i_short_level: a.short_rate,
        horizon_years: a.years,
        freq: a.freq,
        noise_sigma: a.noise,
        seed: a.seed,
        ..SyntheticSpec::default()
    }
    .with_initial_spread(a.i0);
    let path = generate_path(&spec)?;
    let rate_units: CsvUnits = a.units.into();
    let files: [(&str, &TimeSeries<f64>, CsvUnits); 6] = [
        ("p", &path.price, CsvUnits::Fraction),
        ("c", &path.cost, CsvUnits::Fraction),
        ("N", &path.output, CsvUnits::Fraction),
        ("M", &path.money, CsvUnits::Fraction),
        ("ilong", &path.rates.long, rate_units),
        ("ishort", &path.rates.short, rate_units),
    ];
    for (name, series, units) in files {
        write_series_csv(series, path_file(&a.prefix, name), units)?;
    }
    if let Some(truth) = &path.true_inflation {
        write_series_csv(truth, path_file(&a.prefix, "true_inflation"), rate_units)?;
    }
    let s = spread(&path.rates)?;
    let (first, last) = (s.get(0), s.get(s.len() - 1));
    writeln!(out, "samples={} rate_samples={}", path.price.len(), s.len())?;
    if let (Some(first), Some(last)) = (first, last) {
        writeln!(out, "spread_start={first} spread_end={last} ratio={}", last / first)?;
    }
    Ok(0)
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let rate_units: CsvUnits = a.units.into();
    let level = |name: &str, out: &mut dyn Write| read(&path_file(&a.prefix, name), CsvUnits::Fraction, out);
    let path = EconomyPath {
        price: level("p", out)?,
        cost: level("c", out)?,
        output: level("N", out)?,
        money: level("M", out)?,
        rates: RatePair::new(
            read(&path_file(&a.prefix, "ilong"), rate_units, out)?,
            read(&path_file(&a.prefix, "ishort"), rate_units, out)?,
        )?,
        true_inflation: None,
    };
    let residual = equality_residual(&path, a.lag)?;
    let xs: Vec<f64> = residual.finite().map(|(_, x)| x).collect();
    if xs.is_empty() {
        return Err(Error::Data("residual is masked everywhere".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let max_dev = xs.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    writeln!(
        out,
        "n={} masked={} mean={mean:e} std={std:e} max_dev={max_dev:e}",
        xs.len(),
        residual.missing_count()
    )?;
    if a.strict && std > STRICT_STD {
        writeln!(out, "residual is not constant (std {std:e} > {STRICT_STD:e})")?;
        return Ok(2);
    }
    Ok(0)
}

fn cmd_backtest(a: BacktestArgs, out: &mut dyn Write) -> Result<i32> {
    let units: CsvUnits = a.rates.units.into();
    let rates = read_rates(&a.rates, out)?;
    let (money, output) = read_levels(Some(&a.money), a.output_series.as_deref(), out)?;
    let money = money.expect("money is required");
    let actual = read(&a.actual, units, out)?;
    let p = params(a.lag, a.window, a.floor, output.is_some());
    let prediction = predict_full(&rates, &money, output.as_ref(), &p)?;
    let metrics = goodness_of_fit(&prediction.inflation, &actual)?;

    let (pred, act) = align(&prediction.inflation, &actual)?;
    let scale = |v: Option<f64>| match (v, units) {
        (Some(x), CsvUnits::Percent) => (x * 100.0).to_string(),
        (Some(x), CsvUnits::Fraction) => x.to_string(),
        (None, _) => String::new(),
    };
    let mut w = csv::Writer::from_path(&a.report)?;
    w.write_record(["DATE", "PREDICTED", "ACTUAL"])?;
    for k in 0..pred.len() {
        w.write_record([pred.month_of(k).to_string(), scale(pred.get(k)), scale(act.get(k))])?;
    }
    w.flush()?;

    writeln!(
        out,
        "span={}..{} lag={} window={}",
        pred.start(),
        pred.end(),
        a.lag,
        a.window
    )?;
    writeln!(out, "masked_predictions={}", prediction.coverage.masked_count)?;
    writeln!(out, "n_points={}", metrics.n_points)?;
    writeln!(out, "rmse={}", metrics.rmse)?;
    writeln!(out, "pearson={}", fmt_opt(metrics.pearson))?;
    writeln!(out, "sign_agreement={}", metrics.sign_agreement)?;
    Ok(0)
}
