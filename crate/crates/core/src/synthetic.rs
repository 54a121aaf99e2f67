//! Synthetic economies that satisfy the delayed income identity exactly.
//!
//! Prices follow a chosen inflation profile, output and money grow
//! exponentially, and the spread is then solved from
//!
//! ```text
//! M(t) * spread(t) = k * N(t + t0) * (p(t + t0) - c(t + t0))
//! ```
//!
//! so the identity holds by construction and the inflation that produced the
//! prices is known exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::model::{sample_count, EconomyPath, RatePair};
use crate::scalar::Real;
use crate::series::{TimeSeries, Units};

/// Inflation rate (fraction/year) as a function of years since the start.
#[derive(Debug, Clone, PartialEq)]
pub enum InflationProfile<T> {
    Constant(T),
    /// Linear rise from `base` to `peak` over `rise_years` starting at t = 0,
    /// linear fall back to `base` over `fall_years`, then `base`.
    Hump {
        base: T,
        peak: T,
        rise_years: T,
        fall_years: T,
    },
    /// Consecutive `(duration_years, rate)` segments; the last rate persists.
    Piecewise(Vec<(T, T)>),
}

impl<T: Real> InflationProfile<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InflationProfile::Constant(r) => r.is_finite(),
            InflationProfile::Hump {
                base,
                peak,
                rise_years,
                fall_years,
            } => base.is_finite() && peak.is_finite() && *rise_years > T::zero() && *fall_years > T::zero(),
            InflationProfile::Piecewise(segments) => {
                !segments.is_empty() && segments.iter().all(|(d, r)| *d > T::zero() && r.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid inflation profile {self:?}")))
        }
    }

    pub fn rate_at(&self, t: T) -> T {
        match self {
            InflationProfile::Constant(r) => *r,
            InflationProfile::Hump {
                base,
                peak,
                rise_years,
                fall_years,
            } => {
                let height = *peak - *base;
                if t < T::zero() {
                    *base
                } else if t < *rise_years {
                    *base + height * t / *rise_years
                } else if t < *rise_years + *fall_years {
                    *base + height * (T::one() - (t - *rise_years) / *fall_years)
                } else {
                    *base
                }
            }
            InflationProfile::Piecewise(segments) => {
                let mut end = T::zero();
                for &(duration, rate) in segments {
                    end = end + duration;
                    if t < end {
                        return rate;
                    }
                }
                segments.last().expect("validated non-empty").1
            }
        }
    }

    /// Exact integral of the rate over `[0, t]`, `t >= 0`.
    pub fn integral(&self, t: T) -> T {
        let half = T::lit(0.5);
        match self {
            InflationProfile::Constant(r) => *r * t,
            InflationProfile::Hump {
                base,
                peak,
                rise_years,
                fall_years,
            } => {
                let (r, f) = (*rise_years, *fall_years);
                let height = *peak - *base;
                let excess = if t <= r {
                    height * t * t * half / r
                } else if t <= r + f {
                    let u = t - r;
                    height * (r * half + u - u * u * half / f)
                } else {
                    height * (r + f) * half
                };
                *base * t + excess
            }
            InflationProfile::Piecewise(segments) => {
                let mut acc = T::zero();
                let mut start = T::zero();
                for &(duration, rate) in segments {
                    let end = start + duration;
                    if t <= end {
                        return acc + rate * (t - start);
                    }
                    acc = acc + rate * duration;
                    start = end;
                }
                acc + segments.last().expect("validated non-empty").1 * (t - start)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec<T> {
    pub inflation_profile: InflationProfile<T>,
    /// Built-in delay, in samples.
    pub lag_samples: usize,
    /// Money-supply growth, fraction/year.
    pub money_growth: T,
    /// Output growth, fraction/year.
    pub output_growth: T,
    /// `c = alpha * p`, alpha in (0, 1).
    pub cost_price_ratio: T,
    /// Banker income over manufacturer income; 1 is exact equality.
    pub proportionality: T,
    pub i_short_level: T,
    pub price0: T,
    pub output0: T,
    pub money0: T,
    pub horizon_years: T,
    pub freq: u32,
    /// Relative noise applied after construction; 0 keeps the path exact.
    pub noise_sigma: T,
    pub seed: u64,
    pub start: Month,
}

impl<T: Real> Default for SyntheticSpec<T> {
    fn default() -> Self {
        SyntheticSpec {
            inflation_profile: InflationProfile::Constant(T::lit(0.03)),
            lag_samples: 0,
            money_growth: T::zero(),
            output_growth: T::zero(),
            cost_price_ratio: T::lit(0.5),
            proportionality: T::one(),
            i_short_level: T::lit(0.02),
            price0: T::lit(100.0),
            output0: T::lit(1000.0),
            money0: T::one(),
            horizon_years: T::lit(10.0),
            freq: 12,
            noise_sigma: T::zero(),
            seed: 1,
            start: Month::from_index(1974 * 12),
        }
        .with_initial_spread(T::lit(0.03))
    }
}

impl<T: Real> SyntheticSpec<T> {
    fn margin_at(&self, t: T) -> T {
        let price = self.price0 * self.inflation_profile.integral(t).exp();
        price * (T::one() - self.cost_price_ratio)
    }

    fn years(&self, k: usize) -> T {
        T::from_usize_lossy(k) / T::from_u32(self.freq).expect("frequency representable")
    }

    /// Chooses the initial money supply so that the spread starts at `i0`.
    pub fn with_initial_spread(mut self, i0: T) -> Self {
        let ahead = self.years(self.lag_samples);
        let manufacturer = self.output0 * (self.output_growth * ahead).exp() * self.margin_at(ahead);
        self.money0 = self.proportionality * manufacturer / i0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.inflation_profile.validate()?;
        let positive = |name: &str, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Usage(format!("{name} must be positive, got {x}")))
            }
        };
        positive("proportionality", self.proportionality)?;
        positive("initial price", self.price0)?;
        positive("initial output", self.output0)?;
        positive("initial money supply", self.money0)?;
        positive("horizon", self.horizon_years)?;
        if !(self.cost_price_ratio > T::zero() && self.cost_price_ratio < T::one()) {
            return Err(Error::Usage(format!(
                "cost/price ratio must lie in (0, 1), got {}",
                self.cost_price_ratio
            )));
        }
        if self.freq == 0 {
            return Err(Error::Usage("frequency must be positive".into()));
        }
        if !(self.noise_sigma >= T::zero() && self.noise_sigma.is_finite()) {
            return Err(Error::Usage("noise sigma must be >= 0".into()));
        }
        for (name, x) in [
            ("money growth", self.money_growth),
            ("output growth", self.output_growth),
            ("short rate", self.i_short_level),
        ] {
            if !x.is_finite() {
                return Err(Error::Usage(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Builds an economy satisfying the delayed income identity exactly, then
/// applies `spec.noise_sigma` noise if it is non-zero.
///
/// Prices, costs, output, money and true inflation cover `[0, horizon]`; the
/// rates end `lag_samples` earlier because the spread at `t` is determined by
/// the manufacturer side at `t + t0`.
pub fn generate_path<T: Real>(spec: &SyntheticSpec<T>) -> Result<EconomyPath<T>> {
    spec.validate()?;
    let n = sample_count(spec.horizon_years, spec.freq);
    if n <= spec.lag_samples {
        return Err(Error::Data(format!(
            "horizon of {n} samples does not exceed the lag of {}",
            spec.lag_samples
        )));
    }
    let times: Vec<T> = (0..n).map(|k| spec.years(k)).collect();
    let price: Vec<T> = times
        .iter()
        .map(|&t| spec.price0 * spec.inflation_profile.integral(t).exp())
        .collect();
    let cost: Vec<T> = price.iter().map(|&p| spec.cost_price_ratio * p).collect();
    let output: Vec<T> = times
        .iter()
        .map(|&t| spec.output0 * (spec.output_growth * t).exp())
        .collect();
    let money: Vec<T> = times
        .iter()
        .map(|&t| spec.money0 * (spec.money_growth * t).exp())
        .collect();
    let spread: Vec<T> = (0..n - spec.lag_samples)
        .map(|k| {
            let ahead = k + spec.lag_samples;
            spec.proportionality * output[ahead] * (price[ahead] - cost[ahead]) / money[k]
        })
        .collect();
    let true_inflation: Vec<T> = times.iter().map(|&t| spec.inflation_profile.rate_at(t)).collect();

    let series = |values: &[T], units: Units| {
        TimeSeries::from_values(spec.start, spec.freq, values).map(|s| s.with_units(units))
    };
    let short = vec![spec.i_short_level; spread.len()];
    let long: Vec<T> = spread.iter().map(|&s| spec.i_short_level + s).collect();
    let path = EconomyPath {
        price: series(&price, Units::IndexLevel)?.with_base_time(spec.start),
        cost: series(&cost, Units::IndexLevel)?.with_base_time(spec.start),
        output: series(&output, Units::CountLevel)?,
        money: series(&money, Units::CountLevel)?,
        rates: RatePair::new(series(&long, Units::Rate)?, series(&short, Units::Rate)?)?,
        true_inflation: Some(series(&true_inflation, Units::Rate)?),
    };
    if spec.noise_sigma > T::zero() {
        inject_noise(&path, spec.noise_sigma, spec.seed)
    } else {
        Ok(path)
    }
}

fn population_std<T: Real>(ts: &TimeSeries<T>) -> T {
    let xs: Vec<T> = ts.finite().map(|(_, x)| x).collect();
    if xs.is_empty() {
        return T::zero();
    }
    // Shifted by the first sample so a constant series has exactly zero spread.
    let n = T::from_usize_lossy(xs.len());
    let d: Vec<T> = xs.iter().map(|&x| x - xs[0]).collect();
    let mean = d.iter().copied().sum::<T>() / n;
    (d.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n).sqrt()
}

/// Perturbs a path with seeded noise.
///
/// Level series (price, cost, output, money) are multiplied by `exp(sigma z)`;
/// rate series get `sigma * std(series) * z` added. `z` is standard normal,
/// drawn in that series order. `true_inflation` is left alone.
pub fn inject_noise<T: Real>(path: &EconomyPath<T>, sigma: T, seed: u64) -> Result<EconomyPath<T>> {
    if !(sigma >= T::zero() && sigma.is_finite()) {
        return Err(Error::Usage(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == T::zero() {
        return Ok(path.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move || T::lit(StandardNormal.sample(&mut rng));
    let mut levels = |ts: &TimeSeries<T>| ts.map(|x| x * (sigma * draw()).exp());
    let price = levels(&path.price)?;
    let cost = levels(&path.cost)?;
    let output = levels(&path.output)?;
    let money = levels(&path.money)?;
    let mut rate = |ts: &TimeSeries<T>| {
        let scale = sigma * population_std(ts);
        ts.map(|x| x + scale * draw())
    };
    let long = rate(&path.rates.long)?;
    let short = rate(&path.rates.short)?;
    Ok(EconomyPath {
        price,
        cost,
        output,
        money,
        rates: RatePair::new(long, short)?,
        true_inflation: path.true_inflation.clone(),
    })
}
