//! Fit scoring and delay estimation by exhaustive integer grid search.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{predict_full, predict_simple, ModelParams, PredictionResult, RatePair};
use crate::scalar::Real;
use crate::series::{align, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitMetrics<T> {
    pub rmse: T,
    /// `None` when either side has zero variance over the common points.
    pub pearson: Option<T>,
    /// Share of points where the signs agree; zero counts as positive.
    pub sign_agreement: T,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Rmse,
    Pearson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagScore<T> {
    pub lag: usize,
    pub metrics: FitMetrics<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagFit<T> {
    pub best_lag: usize,
    /// Scored lags in ascending order.
    pub grid: Vec<LagScore<T>>,
    /// Lags with fewer than two comparable points.
    pub skipped: Vec<usize>,
    pub objective: Objective,
}

impl<T: Real> LagFit<T> {
    pub fn best(&self) -> &LagScore<T> {
        self.grid
            .iter()
            .find(|s| s.lag == self.best_lag)
            .expect("best lag is on the grid")
    }
}

/// Pairs of samples finite in both series over their common span.
fn common_points<T: Real>(a: &TimeSeries<T>, b: &TimeSeries<T>) -> Result<Vec<(T, T)>> {
    Ok(dated_points(a, b)?.into_iter().map(|(_, x, y)| (x, y)).collect())
}

/// Calendar position plus the two values compared there.
type DatedPoint<T> = (i64, T, T);

/// Like [`common_points`], keyed by sample position.
fn dated_points<T: Real>(a: &TimeSeries<T>, b: &TimeSeries<T>) -> Result<Vec<DatedPoint<T>>> {
    let (a, b) = align(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .enumerate()
        .filter_map(|(k, (x, y))| Some((a.tick_of(k), (*x)?, (*y)?)))
        .collect())
}

fn pearson_of<T: Real>(pairs: &[(T, T)]) -> Option<T> {
    let n = T::from_usize_lossy(pairs.len());
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Compares two series over the samples finite in both.
pub fn goodness_of_fit<T: Real>(predicted: &TimeSeries<T>, actual: &TimeSeries<T>) -> Result<FitMetrics<T>> {
    metrics_of(&common_points(predicted, actual)?)
}

fn metrics_of<T: Real>(pairs: &[(T, T)]) -> Result<FitMetrics<T>> {
    if pairs.len() < 2 {
        return Err(Error::Data(format!(
            "need at least 2 common finite points, found {}",
            pairs.len()
        )));
    }
    let n = T::from_usize_lossy(pairs.len());
    let sse: T = pairs.iter().map(|&(p, a)| (p - a) * (p - a)).sum();
    let agree = pairs
        .iter()
        .filter(|&&(p, a)| (p >= T::zero()) == (a >= T::zero()))
        .count();
    Ok(FitMetrics {
        rmse: (sse / n).sqrt(),
        pearson: pearson_of(pairs),
        sign_agreement: T::from_usize_lossy(agree) / n,
        n_points: pairs.len(),
    })
}

fn is_better<T: Real>(objective: Objective, candidate: &FitMetrics<T>, incumbent: &FitMetrics<T>) -> bool {
    match objective {
        Objective::Rmse => candidate.rmse < incumbent.rmse,
        Objective::Pearson => match (candidate.pearson, incumbent.pearson) {
            (Some(c), Some(i)) => c > i,
            (Some(_), None) => true,
            _ => false,
        },
    }
}

/// Scores every lag in `lags` against `actual_inflation` and picks the best.
///
/// Uses the full model when `money` is given, the spread-only model otherwise.
/// `params.lag_samples` is ignored. Lags with fewer than two comparable
/// points are skipped; the rest are scored on the dates comparable at all of
/// them. Ties go to the smallest lag.
pub fn fit_lag<T: Real>(
    rates: &RatePair<T>,
    money: Option<&TimeSeries<T>>,
    output: Option<&TimeSeries<T>>,
    actual_inflation: &TimeSeries<T>,
    lags: &[usize],
    params: &ModelParams<T>,
    objective: Objective,
) -> Result<LagFit<T>> {
    if lags.is_empty() {
        return Err(Error::Usage("lag grid is empty".into()));
    }
    if money.is_none() && output.is_some() {
        return Err(Error::Usage("an output series needs a money series".into()));
    }
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();

    let predict = |lag: usize| -> Result<PredictionResult<T>> {
        let p = params.with_lag(lag);
        match money {
            Some(m) => predict_full(rates, m, output, &p),
            None => predict_simple(rates, &p),
        }
    };

    let mut scored: Vec<(usize, Vec<DatedPoint<T>>)> = Vec::with_capacity(lags.len());
    let mut skipped = Vec::new();
    for lag in lags {
        let prediction = predict(lag)?;
        match dated_points(&prediction.inflation, actual_inflation) {
            Ok(points) if points.len() >= 2 => scored.push((lag, points)),
            Ok(_) | Err(Error::EmptyOverlap) => skipped.push(lag),
            Err(e) => return Err(e),
        }
    }

    // Every lag is scored on the same target dates: otherwise lags that push
    // the noisy trailing edge of the prediction past the data would win.
    let mut common: Option<BTreeSet<i64>> = None;
    for (_, points) in &scored {
        let dates: BTreeSet<i64> = points.iter().map(|p| p.0).collect();
        common = Some(match common {
            Some(c) => c.intersection(&dates).copied().collect(),
            None => dates,
        });
    }
    let common = common.unwrap_or_default();
    if !scored.is_empty() && common.len() < 2 {
        return Err(Error::Data(format!(
            "lags {:?} share fewer than 2 comparable dates",
            scored.iter().map(|s| s.0).collect::<Vec<_>>()
        )));
    }
    let grid = scored
        .into_iter()
        .map(|(lag, points)| {
            let pairs: Vec<(T, T)> = points
                .into_iter()
                .filter(|p| common.contains(&p.0))
                .map(|(_, x, y)| (x, y))
                .collect();
            metrics_of(&pairs).map(|metrics| LagScore { lag, metrics })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<&LagScore<T>> = None;
    for score in &grid {
        if objective == Objective::Pearson && score.metrics.pearson.is_none() {
            continue;
        }
        match best {
            Some(b) if !is_better(objective, &score.metrics, &b.metrics) => {}
            _ => best = Some(score),
        }
    }
    let best_lag = best
        .map(|s| s.lag)
        .ok_or_else(|| Error::Data("no lag on the grid has enough comparable points".into()))?;
    Ok(LagFit {
        best_lag,
        grid,
        skipped,
        objective,
    })
}

/// Pearson correlation of `a` shifted by each lag in `-max_lag..=max_lag`
/// against `b`. Lags where the correlation is undefined are omitted.
pub fn cross_correlation<T: Real>(a: &TimeSeries<T>, b: &TimeSeries<T>, max_lag: usize) -> Result<Vec<(i64, T)>> {
    let max_lag = max_lag as i64;
    let mut out = Vec::new();
    for lag in -max_lag..=max_lag {
        let pairs = match common_points(&a.shift(lag), b) {
            Ok(p) => p,
            Err(Error::EmptyOverlap) => continue,
            Err(e) => return Err(e),
        };
        if pairs.len() < 2 {
            continue;
        }
        if let Some(r) = pearson_of(&pairs) {
            out.push((lag, r));
        }
    }
    if out.is_empty() {
        return Err(Error::Data("correlation undefined at every lag".into()));
    }
    Ok(out)
}
