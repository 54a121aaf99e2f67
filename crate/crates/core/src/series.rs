//! Uniformly sampled, maskable time series and the numerical primitives the
//! model is built from: alignment, resampling, shifting, smoothing, logarithm
//! and annualized differentiation.
//!
//! A sample is either a finite value or MISSING (`None`). Masks only ever
//! grow: no operation here turns a MISSING sample into a number.

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Semantic tag carried by a series. Not interpreted by the numerics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// Fraction per year (0.05 == 5%/year).
    #[default]
    Rate,
    IndexLevel,
    CountLevel,
}

/// A uniformly sampled real-valued series anchored to the calendar.
///
/// Positions are kept in ticks of `1 / (12 * freq)` years, so every sample
/// and every month boundary falls on an integer tick for any frequency.
/// Sample `k` sits at tick `start_tick + 12 * k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    start_tick: i64,
    freq: u32,
    values: Vec<Option<T>>,
    base_time: Option<Month>,
    units: Units,
}

/// Which samples of a series are MISSING.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coverage {
    pub masked_count: usize,
    /// Maximal runs of MISSING samples as inclusive `(first, last)` indices, sorted.
    pub masked_spans: Vec<(usize, usize)>,
}

impl Coverage {
    pub fn of<T>(values: &[Option<T>]) -> Self {
        let mut spans = Vec::new();
        let mut open: Option<usize> = None;
        for (k, v) in values.iter().enumerate() {
            match (v.is_none(), open) {
                (true, None) => open = Some(k),
                (false, Some(s)) => {
                    spans.push((s, k - 1));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(s) = open {
            spans.push((s, values.len() - 1));
        }
        Coverage {
            masked_count: values.iter().filter(|v| v.is_none()).count(),
            masked_spans: spans,
        }
    }
}

/// A series together with a summary of its MISSING samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedReport<T> {
    pub series: TimeSeries<T>,
    pub coverage: Coverage,
}

impl<T> MaskedReport<T> {
    pub fn new(series: TimeSeries<T>) -> Self {
        let coverage = Coverage::of(&series.values);
        MaskedReport { series, coverage }
    }

    pub fn masked_count(&self) -> usize {
        self.coverage.masked_count
    }

    pub fn masked_spans(&self) -> &[(usize, usize)] {
        &self.coverage.masked_spans
    }
}

impl<T: Real> TimeSeries<T> {
    /// Builds a series whose first sample falls on `start`.
    ///
    /// `None` entries are MISSING. A `Some` holding NaN or an infinity is
    /// rejected as a data error.
    pub fn new(start: Month, freq: u32, values: Vec<Option<T>>) -> Result<Self> {
        if freq == 0 {
            return Err(Error::Usage("frequency must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::Usage("a series needs at least one sample".into()));
        }
        if let Some(k) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::Data(format!("non-finite value at sample {k}")));
        }
        Ok(TimeSeries {
            start_tick: start.index() * i64::from(freq),
            freq,
            values,
            base_time: None,
            units: Units::default(),
        })
    }

    /// Builds a gap-free series.
    pub fn from_values(start: Month, freq: u32, values: &[T]) -> Result<Self> {
        Self::new(start, freq, values.iter().copied().map(Some).collect())
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    /// Records the index base month. Metadata only: a constant base cancels
    /// under the logarithmic derivative, so no normalization is applied.
    pub fn with_base_time(mut self, base: Month) -> Self {
        self.base_time = Some(base);
        self
    }

    pub fn freq(&self) -> u32 {
        self.freq
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Option<T> {
        self.values.get(k).copied().flatten()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn base_time(&self) -> Option<Month> {
        self.base_time
    }

    /// Calendar month containing the first sample.
    pub fn start(&self) -> Month {
        self.month_of(0)
    }

    /// Calendar month containing the last sample.
    pub fn end(&self) -> Month {
        self.month_of(self.len() - 1)
    }

    /// Calendar month containing sample `k` (floored for sub-monthly data).
    pub fn month_of(&self, k: usize) -> Month {
        Month::from_index(self.tick_of(k).div_euclid(i64::from(self.freq)))
    }

    /// Time of sample `k` in years since year 0.
    pub fn time_of(&self, k: usize) -> f64 {
        self.tick_of(k) as f64 / (12.0 * f64::from(self.freq))
    }

    pub(crate) fn tick_of(&self, k: usize) -> i64 {
        self.start_tick + 12 * k as i64
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Finite samples as `(index, value)` pairs.
    pub fn finite(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.values.iter().enumerate().filter_map(|(k, v)| v.map(|x| (k, x)))
    }

    /// Same geometry and metadata, new samples.
    fn with_samples(&self, values: Vec<Option<T>>) -> Self {
        debug_assert!(!values.is_empty());
        TimeSeries {
            start_tick: self.start_tick,
            freq: self.freq,
            values,
            base_time: self.base_time,
            units: self.units,
        }
    }

    /// Applies `f` to every finite sample. MISSING stays MISSING.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Result<Self> {
        let values: Vec<Option<T>> = self.values.iter().map(|v| v.map(&mut f)).collect();
        if let Some(k) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::Data(format!(
                "mapping produced a non-finite value at sample {k}"
            )));
        }
        Ok(self.with_samples(values))
    }

    /// Pointwise combination on the overlapping span; MISSING if either side is.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        let (a, b) = align(self, other)?;
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(f(*x, *y)).filter(|z| z.is_finite()),
                _ => None,
            })
            .collect();
        Ok(a.with_samples(values))
    }

    /// Re-dates the series `lag` samples later (earlier when negative).
    /// Values are untouched.
    pub fn shift(&self, lag: i64) -> Self {
        let mut out = self.clone();
        out.start_tick += 12 * lag;
        out
    }

    /// Converts between frequencies whose ratio is an integer.
    ///
    /// Downsampling averages complete blocks of `from / to` samples (a trailing
    /// partial block is dropped). Upsampling places each source sample on its
    /// own instant and interpolates linearly between them; the samples after
    /// the last source sample replicate it. An output sample is MISSING when
    /// any source sample it depends on is.
    pub fn resample(&self, target_freq: u32) -> Result<Self> {
        if target_freq == 0 {
            return Err(Error::Usage("target frequency must be positive".into()));
        }
        let from = self.freq;
        if target_freq == from {
            return Ok(self.clone());
        }
        let unsupported = Error::UnsupportedConversion { from, to: target_freq };
        let values = if target_freq < from {
            if !from.is_multiple_of(target_freq) {
                return Err(unsupported);
            }
            let block = (from / target_freq) as usize;
            let out: Vec<Option<T>> = self
                .values
                .chunks_exact(block)
                .map(|chunk| centered_mean(chunk, chunk[0]))
                .collect();
            if out.is_empty() {
                return Err(Error::Data(format!(
                    "{} samples do not fill one block of {block}",
                    self.len()
                )));
            }
            out
        } else {
            if !target_freq.is_multiple_of(from) {
                return Err(unsupported);
            }
            let factor = (target_freq / from) as usize;
            let n = self.len();
            let mut out = Vec::with_capacity(n * factor);
            for i in 0..n {
                out.push(self.values[i]);
                for j in 1..factor {
                    let v = if i + 1 < n {
                        match (self.values[i], self.values[i + 1]) {
                            (Some(a), Some(b)) => {
                                let w = T::from_usize_lossy(j) / T::from_usize_lossy(factor);
                                Some(a + (b - a) * w)
                            }
                            _ => None,
                        }
                    } else {
                        self.values[i]
                    };
                    out.push(v);
                }
            }
            out
        };
        let start_tick = (self.start_tick * i64::from(target_freq)).div_euclid(i64::from(from));
        Ok(TimeSeries {
            start_tick,
            freq: target_freq,
            values,
            base_time: self.base_time,
            units: self.units,
        })
    }

    /// Centered moving average of odd width `window`.
    ///
    /// Near the ends the window shrinks symmetrically to the widest centered
    /// window that fits, so the output has the input's length and no value is
    /// extrapolated. Any window containing a MISSING sample yields MISSING.
    pub fn smooth(&self, window: usize) -> Result<Self> {
        if window == 0 || window.is_multiple_of(2) {
            return Err(Error::Usage(format!(
                "smoothing window must be odd and >= 1, got {window}"
            )));
        }
        let n = self.len();
        if window > n {
            return Err(Error::Usage(format!(
                "smoothing window {window} exceeds series length {n}"
            )));
        }
        if window == 1 {
            return Ok(self.clone());
        }
        let half = (window - 1) / 2;
        let values = (0..n)
            .map(|k| {
                let h = half.min(k).min(n - 1 - k);
                centered_mean(&self.values[k - h..=k + h], self.values[k])
            })
            .collect();
        Ok(self.with_samples(values))
    }

    /// Natural logarithm; samples at or below `floor` become MISSING.
    pub fn log_series(&self, floor: T) -> Result<MaskedReport<T>> {
        if !(floor > T::zero() && floor.is_finite()) {
            return Err(Error::Usage(format!(
                "log floor must be positive and finite, got {floor}"
            )));
        }
        let values = self
            .values
            .iter()
            .map(|v| v.filter(|&x| x > floor).map(T::ln))
            .collect();
        Ok(MaskedReport::new(self.with_samples(values)))
    }

    /// Annualized first derivative.
    ///
    /// Central difference `(x[k+1] - x[k-1]) * freq / 2` in the interior,
    /// forward difference at the first sample and backward at the last. The
    /// stencil at `k` includes `x[k]` itself, so a MISSING sample is never
    /// bridged by its neighbours.
    pub fn derivative(&self) -> Result<Self> {
        let n = self.len();
        if n < 2 {
            return Err(Error::Usage("derivative needs at least two samples".into()));
        }
        let freq = T::from_u32(self.freq).expect("frequency representable");
        let half_freq = freq / T::lit(2.0);
        let diff = |hi: usize, lo: usize, scale: T| match (self.values[hi], self.values[lo]) {
            (Some(b), Some(a)) => Some((b - a) * scale),
            _ => None,
        };
        let values = (0..n)
            .map(|k| {
                if k == 0 {
                    diff(1, 0, freq)
                } else if k == n - 1 {
                    diff(n - 1, n - 2, freq)
                } else {
                    self.values[k].and(diff(k + 1, k - 1, half_freq))
                }
            })
            .collect();
        Ok(self.with_samples(values).with_units(Units::Rate))
    }

    /// `d ln x / dt` in fraction per year: log (with floor masking), then
    /// smoothing of the log series, then differentiation.
    pub fn log_derivative(&self, floor: T, window: usize) -> Result<MaskedReport<T>> {
        let logged = self.log_series(floor)?.series;
        let rate = logged.smooth(window)?.derivative()?;
        Ok(MaskedReport::new(rate))
    }
}

/// Mean of `window` accumulated as deviations from `reference`, which makes
/// the mean of a constant window exact. MISSING if any sample is.
fn centered_mean<T: Real>(window: &[Option<T>], reference: Option<T>) -> Option<T> {
    let reference = reference?;
    let deviations: Option<T> = window.iter().map(|v| v.map(|x| x - reference)).sum();
    deviations.map(|d| reference + d / T::from_usize_lossy(window.len()))
}

/// Restricts two same-frequency series to their common span.
pub fn align<T: Real>(a: &TimeSeries<T>, b: &TimeSeries<T>) -> Result<(TimeSeries<T>, TimeSeries<T>)> {
    if a.freq != b.freq {
        return Err(Error::FrequencyMismatch(a.freq, b.freq));
    }
    if (a.start_tick - b.start_tick) % 12 != 0 {
        return Err(Error::Usage("series are sampled on offset grids".into()));
    }
    let start = a.start_tick.max(b.start_tick);
    let end = a.tick_of(a.len() - 1).min(b.tick_of(b.len() - 1));
    if start > end {
        return Err(Error::EmptyOverlap);
    }
    let cut = |s: &TimeSeries<T>| {
        let lo = ((start - s.start_tick) / 12) as usize;
        let hi = ((end - s.start_tick) / 12) as usize;
        TimeSeries {
            start_tick: start,
            freq: s.freq,
            values: s.values[lo..=hi].to_vec(),
            base_time: s.base_time,
            units: s.units,
        }
    };
    Ok((cut(a), cut(b)))
}
