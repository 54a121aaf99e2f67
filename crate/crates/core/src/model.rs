//! Spread construction, inflation prediction and the income-identity residual.
//!
//! With `s(t) = i_long(t) - i_short(t)` and delay `t0`:
//!
//! ```text
//! I(t + t0) = d ln s(t)/dt + d ln M(t)/dt - d ln N(t + t0)/dt
//! ```
//!
//! [`predict_simple`] keeps only the spread term. Samples where the spread is
//! at or below the floor (flat or inverted curve) are masked, never
//! extrapolated through.

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::{Coverage, TimeSeries, Units};

/// Long and short interest rates, fraction per year.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePair<T> {
    pub long: TimeSeries<T>,
    pub short: TimeSeries<T>,
}

impl<T: Real> RatePair<T> {
    pub fn new(long: TimeSeries<T>, short: TimeSeries<T>) -> Result<Self> {
        crate::series::align(&long, &short)?;
        Ok(RatePair { long, short })
    }
}

/// How output growth enters the full prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NMode {
    /// An output series is supplied and its log-derivative is subtracted.
    ExplicitN,
    /// No output series; the money series is expected to absorb it.
    #[default]
    FoldedIntoM,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Delay between a spread change and its effect on inflation, in samples.
    pub lag_samples: usize,
    /// Odd moving-average width applied to every log series before differentiating.
    pub smooth_window: usize,
    /// Spread values at or below this (fraction/year) are masked.
    pub spread_floor: T,
    pub n_mode: NMode,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        ModelParams {
            lag_samples: 0,
            smooth_window: 1,
            spread_floor: T::lit(1e-4),
            n_mode: NMode::default(),
        }
    }
}

impl<T: Real> ModelParams<T> {
    pub fn with_lag(self, lag_samples: usize) -> Self {
        ModelParams { lag_samples, ..self }
    }

    pub fn with_window(self, smooth_window: usize) -> Self {
        ModelParams { smooth_window, ..self }
    }

    pub fn with_n_mode(self, n_mode: NMode) -> Self {
        ModelParams { n_mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return Err(Error::Usage(format!(
                "smoothing window must be odd and >= 1, got {}",
                self.smooth_window
            )));
        }
        if !(self.spread_floor > T::zero() && self.spread_floor.is_finite()) {
            return Err(Error::Usage(format!(
                "spread floor must be positive, got {}",
                self.spread_floor
            )));
        }
        Ok(())
    }
}

/// Predicted inflation, already re-dated by the delay.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult<T> {
    pub inflation: TimeSeries<T>,
    pub coverage: Coverage,
    pub params: ModelParams<T>,
}

impl<T: Real> PredictionResult<T> {
    fn new(inflation: TimeSeries<T>, params: ModelParams<T>) -> Self {
        let inflation = inflation.with_units(Units::Rate);
        let coverage = Coverage::of(inflation.values());
        PredictionResult {
            inflation,
            coverage,
            params,
        }
    }
}

/// A spread growing at a constant relative rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec<T> {
    /// Spread at t = 0, fraction/year.
    pub i0: T,
    pub inflation_rate: T,
    pub horizon_years: T,
    pub freq: u32,
    pub start: Month,
}

impl<T: Real> ScenarioSpec<T> {
    pub fn new(i0: T, inflation_rate: T, horizon_years: T, freq: u32) -> Result<Self> {
        let spec = ScenarioSpec {
            i0,
            inflation_rate,
            horizon_years,
            freq,
            start: Month::from_index(1974 * 12),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.i0 > T::zero() && self.i0.is_finite()) {
            return Err(Error::Usage("initial spread must be positive".into()));
        }
        if !(self.horizon_years > T::zero() && self.horizon_years.is_finite()) {
            return Err(Error::Usage("horizon must be positive".into()));
        }
        if !self.inflation_rate.is_finite() {
            return Err(Error::Usage("inflation rate must be finite".into()));
        }
        if self.freq == 0 {
            return Err(Error::Usage("frequency must be positive".into()));
        }
        Ok(())
    }

    /// Number of samples on `[0, horizon]`, both ends included when the
    /// horizon is a whole number of samples.
    pub fn sample_count(&self) -> usize {
        sample_count(self.horizon_years, self.freq)
    }
}

pub(crate) fn sample_count<T: Real>(horizon_years: T, freq: u32) -> usize {
    let steps = horizon_years.to_f64().unwrap_or(0.0) * f64::from(freq);
    // Absorb representation error such as 10.0 * 12 landing just below 120.
    (steps + 1e-9).floor() as usize + 1
}

/// The six quantities of the income identity as aligned series.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyPath<T> {
    /// Price per object.
    pub price: TimeSeries<T>,
    /// Cost per object.
    pub cost: TimeSeries<T>,
    /// Objects produced per year.
    pub output: TimeSeries<T>,
    /// Money supply.
    pub money: TimeSeries<T>,
    pub rates: RatePair<T>,
    /// Ground-truth inflation when the path is synthetic.
    pub true_inflation: Option<TimeSeries<T>>,
}

/// `i_long - i_short` on the common span. Negative values pass through.
pub fn spread<T: Real>(rates: &RatePair<T>) -> Result<TimeSeries<T>> {
    Ok(rates.long.zip_with(&rates.short, |l, s| l - s)?.with_units(Units::Rate))
}

fn spread_term<T: Real>(rates: &RatePair<T>, params: &ModelParams<T>) -> Result<TimeSeries<T>> {
    params.validate()?;
    let s = spread(rates)?;
    if !s.finite().any(|(_, x)| x > params.spread_floor) {
        return Err(Error::Data("spread never exceeds floor".into()));
    }
    Ok(s.log_derivative(params.spread_floor, params.smooth_window)?.series)
}

/// Inflation from the spread alone: `I(t + t0) = d ln s(t)/dt`.
pub fn predict_simple<T: Real>(rates: &RatePair<T>, params: &ModelParams<T>) -> Result<PredictionResult<T>> {
    let term = spread_term(rates, params)?;
    Ok(PredictionResult::new(term.shift(params.lag_samples as i64), *params))
}

fn require_positive<T: Real>(name: &str, ts: &TimeSeries<T>) -> Result<()> {
    match ts.finite().find(|&(_, x)| x <= T::zero()) {
        Some((k, x)) => Err(Error::Data(format!(
            "{name} must be strictly positive, got {x} at {}",
            ts.month_of(k)
        ))),
        None => Ok(()),
    }
}

/// Inflation including money-supply and output growth.
///
/// The spread and money terms are evaluated at `t` and re-dated by the delay.
/// `output` must already be dated on the `t + t0` calendar and is not shifted.
pub fn predict_full<T: Real>(
    rates: &RatePair<T>,
    money: &TimeSeries<T>,
    output: Option<&TimeSeries<T>>,
    params: &ModelParams<T>,
) -> Result<PredictionResult<T>> {
    match (params.n_mode, output) {
        (NMode::ExplicitN, None) => return Err(Error::Usage("explicit output mode needs an output series".into())),
        (NMode::FoldedIntoM, Some(_)) => {
            return Err(Error::Usage(
                "output series given but output growth is folded into money".into(),
            ))
        }
        _ => {}
    }
    require_positive("money supply", money)?;
    if let Some(n) = output {
        require_positive("output", n)?;
    }

    let level_floor = T::min_positive_value();
    let window = params.smooth_window;
    let spread_rate = spread_term(rates, params)?;
    let money_rate = money.log_derivative(level_floor, window)?.series;
    let mut inflation = spread_rate
        .zip_with(&money_rate, |s, m| s + m)?
        .shift(params.lag_samples as i64);
    if let Some(n) = output {
        let output_rate = n.log_derivative(level_floor, window)?.series;
        inflation = inflation.zip_with(&output_rate, |x, g| x - g)?;
    }
    Ok(PredictionResult::new(inflation, *params))
}

/// Spread path `i0 * exp(I t)` sampled at `t = k / freq` over the horizon.
pub fn constant_inflation_spread<T: Real>(spec: &ScenarioSpec<T>) -> Result<TimeSeries<T>> {
    spec.validate()?;
    let freq = T::from_u32(spec.freq).expect("frequency representable");
    let values: Vec<T> = (0..spec.sample_count())
        .map(|k| spec.i0 * (spec.inflation_rate * T::from_usize_lossy(k) / freq).exp())
        .collect();
    Ok(TimeSeries::from_values(spec.start, spec.freq, &values)?.with_units(Units::Rate))
}

/// Log-ratio of manufacturer income at `t + t0` to banker income at `t`:
///
/// ```text
/// ln[N(t+t0) (p(t+t0) - c(t+t0))] - ln[M(t) (i_long(t) - i_short(t))]
/// ```
///
/// Returned on the `t + t0` calendar. Constant when incomes are proportional,
/// zero when they are equal. Samples with `p <= c` or a non-positive spread
/// are MISSING.
pub fn equality_residual<T: Real>(path: &EconomyPath<T>, lag_samples: usize) -> Result<TimeSeries<T>> {
    let tiny = T::min_positive_value();
    let margin = path.price.zip_with(&path.cost, |p, c| p - c)?;
    let manufacturer = path
        .output
        .log_series(tiny)?
        .series
        .zip_with(&margin.log_series(tiny)?.series, |a, b| a + b)?;
    let banker = path
        .money
        .log_series(tiny)?
        .series
        .zip_with(&spread(&path.rates)?.log_series(tiny)?.series, |a, b| a + b)?
        .shift(lag_samples as i64);
    manufacturer.zip_with(&banker, |a, b| a - b)
}

/// Relative error of the first-order approximation `e^x ~ 1 + x`.
pub fn linearization_error<T: Real>(x: T) -> T {
    let ex = x.exp();
    (ex - (T::one() + x)).abs() / ex
}
