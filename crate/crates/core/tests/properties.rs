use approx::assert_relative_eq;
use proptest::prelude::*;

use spread_inflation::estimation::{fit_lag, goodness_of_fit, Objective};
use spread_inflation::io::{parse_series_csv, write_series, CsvSchema, CsvUnits};
use spread_inflation::model::{equality_residual, predict_full, predict_simple, spread, ModelParams, NMode, RatePair};
use spread_inflation::synthetic::{generate_path, inject_noise, InflationProfile, SyntheticSpec};
use spread_inflation::{Month, TimeSeries};

fn start() -> Month {
    Month::new(1990, 1).unwrap()
}

fn positive_series(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.3f64..0.3, min_len..120).prop_map(|steps| {
        let mut level = 0.0;
        steps
            .into_iter()
            .map(|d| {
                level += d;
                level.exp()
            })
            .collect()
    })
}

fn masked_series() -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.85, 0.1f64..10.0), 3..80)
}

/// Spreads between 1 and 100 basis points.
fn spread_path(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    positive_series(min_len).prop_map(|v| v.into_iter().map(|x| 1e-4 + 0.01 * x / (1.0 + x)).collect())
}

fn no_floor() -> ModelParams<f64> {
    ModelParams {
        spread_floor: f64::MIN_POSITIVE,
        ..ModelParams::default()
    }
}

fn rates(spread: &[f64], short: f64) -> RatePair<f64> {
    let long: Vec<f64> = spread.iter().map(|s| short + s).collect();
    RatePair::new(
        TimeSeries::from_values(start(), 12, &long).unwrap(),
        TimeSeries::from_values(start(), 12, &vec![short; spread.len()]).unwrap(),
    )
    .unwrap()
}

fn assert_close(a: &TimeSeries<f64>, b: &TimeSeries<f64>, tol: f64) {
    assert_eq!(a.start(), b.start());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.values().iter().zip(b.values()) {
        match (x, y) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= tol, "{x} vs {y}"),
            (None, None) => {}
            _ => panic!("masks differ"),
        }
    }
}

proptest! {
    #[test]
    fn log_derivative_ignores_scale(values in positive_series(3), k in 1e-3f64..1e3, w in 0usize..7) {
        let window = (2 * w + 1).min(if values.len() % 2 == 1 { values.len() } else { values.len() - 1 });
        let s = TimeSeries::from_values(start(), 12, &values).unwrap();
        let a = s.log_derivative(f64::MIN_POSITIVE, window).unwrap().series;
        let b = s.map(|x| k * x).unwrap().log_derivative(f64::MIN_POSITIVE, window).unwrap().series;
        assert_close(&a, &b, 1e-12);
    }

    #[test]
    fn shift_round_trips(values in masked_series(), n in -500i64..500) {
        let s = TimeSeries::new(start(), 12, values).unwrap();
        prop_assert_eq!(s.shift(n).shift(-n), s.clone());
        prop_assert_eq!(s.shift(0), s.clone());
        prop_assert_eq!(s.shift(n).start(), start().add_months(n));
    }

    #[test]
    fn exponentials_differentiate_exactly(x0 in 1e-3f64..1e3, g in -1.0f64..1.0, n in 2usize..200) {
        let values: Vec<f64> = (0..n).map(|k| x0 * (g * k as f64 / 12.0).exp()).collect();
        let s = TimeSeries::from_values(start(), 12, &values).unwrap();
        let rate = s.log_derivative(f64::MIN_POSITIVE, 1).unwrap().series;
        for v in rate.values() {
            let v = v.unwrap();
            // Relative near g = 0 is below the rounding of ln x itself.
            prop_assert!((v - g).abs() <= 1e-12 * g.abs() + 5e-14, "{} vs {}", v, g);
        }
    }

    #[test]
    fn smoothing_preserves_constants(c in -1e6f64..1e6, n in 1usize..100, w in 0usize..10) {
        let window = (2 * w + 1).min(if n % 2 == 1 { n } else { n - 1 });
        let s = TimeSeries::from_values(start(), 12, &vec![c; n]).unwrap();
        let smoothed = s.smooth(window).unwrap();
        prop_assert!(smoothed.values().iter().all(|v| *v == Some(c)));
    }

    #[test]
    fn smoothing_keeps_interior_mean(values in prop::collection::vec(-10.0f64..10.0, 40..120), w in 1usize..5) {
        // A periodic extension makes the interior mean invariant.
        let window = 2 * w + 1;
        let period = values.len();
        let tiled: Vec<f64> = values.iter().chain(&values).chain(&values).copied().collect();
        let s = TimeSeries::from_values(start(), 12, &tiled).unwrap().smooth(window).unwrap();
        let interior: f64 = (period..2 * period).map(|k| s.get(k).unwrap()).sum::<f64>() / period as f64;
        let mean = values.iter().sum::<f64>() / period as f64;
        prop_assert!((interior - mean).abs() < 1e-12);
    }

    #[test]
    fn linear_series_have_exact_slope(a in -100.0f64..100.0, b in -10.0f64..10.0, n in 2usize..100) {
        let values: Vec<f64> = (0..n).map(|k| a + b * k as f64 / 12.0).collect();
        let d = TimeSeries::from_values(start(), 12, &values).unwrap().derivative().unwrap();
        for v in d.values() {
            prop_assert!((v.unwrap() - b).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
        }
    }

    #[test]
    fn masks_never_heal(values in masked_series(), w in 0usize..4, shift in -20i64..20) {
        let s = TimeSeries::new(start(), 12, values).unwrap();
        let window = (2 * w + 1).min(if s.len() % 2 == 1 { s.len() } else { s.len() - 1 });
        let missing: Vec<bool> = s.values().iter().map(Option::is_none).collect();
        let outputs = [
            s.smooth(window).unwrap(),
            s.derivative().unwrap(),
            s.map(|x| x * 2.0).unwrap(),
            s.log_series(1e-9).unwrap().series,
            s.log_derivative(1e-9, window).unwrap().series,
            s.shift(shift).shift(-shift),
        ];
        for out in &outputs {
            for (v, &m) in out.values().iter().zip(&missing) {
                prop_assert!(!(m && v.is_some()));
            }
        }
    }

    #[test]
    fn resampling_keeps_masks(values in masked_series()) {
        let s = TimeSeries::new(start(), 12, values).unwrap();
        if s.len() >= 3 {
            let q = s.resample(4).unwrap();
            for (i, v) in q.values().iter().enumerate() {
                let block = &s.values()[3 * i..3 * i + 3];
                prop_assert_eq!(v.is_some(), block.iter().all(Option::is_some));
            }
        }
    }

    #[test]
    fn prediction_is_lag_equivariant(values in positive_series(5), lag in 0usize..30, w in 0usize..3) {
        let r = rates(&values.iter().map(|v| 0.01 * v).collect::<Vec<_>>(), 0.02);
        let params = ModelParams::default().with_window(2 * w + 1);
        let base = predict_simple(&r, &params).unwrap().inflation;
        let lagged = predict_simple(&r, &params.with_lag(lag)).unwrap().inflation;
        prop_assert_eq!(lagged, base.shift(lag as i64));
    }

    #[test]
    fn prediction_ignores_spread_scale(s in spread_path(3), k in 1e-2f64..1e2, short in -0.02f64..0.1) {
        let scaled: Vec<f64> = s.iter().map(|v| k * v).collect();
        let params = no_floor();
        let a = predict_simple(&rates(&s, 0.03), &params).unwrap().inflation;
        let b = predict_simple(&rates(&scaled, short), &params).unwrap().inflation;
        // Forming short + k*s and subtracting again rounds at the scale of the
        // short rate; that input error is added on top of 1e-12.
        let smallest = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let cancellation = 24.0 * f64::EPSILON * (short.abs() + 0.03) / smallest;
        assert_close(&a, &b, 1e-12 + cancellation);
    }

    #[test]
    fn full_model_degenerates_to_simple(values in positive_series(3), m in 1.0f64..1e12, lag in 0usize..12) {
        let r = rates(&values.iter().map(|v| 0.01 * v).collect::<Vec<_>>(), 0.02);
        let money = TimeSeries::from_values(start(), 12, &vec![m; values.len()]).unwrap();
        let output = TimeSeries::from_values(start().add_months(lag as i64), 12, &vec![3.0; values.len()]).unwrap();
        let params = ModelParams::default().with_lag(lag);
        let simple = predict_simple(&r, &params).unwrap().inflation;
        let folded = predict_full(&r, &money, None, &params).unwrap().inflation;
        let explicit = predict_full(&r, &money, Some(&output), &params.with_n_mode(NMode::ExplicitN)).unwrap().inflation;
        prop_assert_eq!(&folded, &simple);
        prop_assert_eq!(&explicit, &simple);
    }

    #[test]
    fn rmse_is_symmetric(a in prop::collection::vec(-1.0f64..1.0, 2..60), b in prop::collection::vec(-1.0f64..1.0, 2..60)) {
        let x = TimeSeries::from_values(start(), 12, &a).unwrap();
        let y = TimeSeries::from_values(start(), 12, &b).unwrap();
        let xy = goodness_of_fit(&x, &y).unwrap();
        let yx = goodness_of_fit(&y, &x).unwrap();
        prop_assert_eq!(xy.rmse, yx.rmse);
        prop_assert_eq!(xy.n_points, a.len().min(b.len()));
    }

    #[test]
    fn pearson_is_affine_invariant(
        a in prop::collection::vec(-1.0f64..1.0, 3..60),
        b in prop::collection::vec(-1.0f64..1.0, 3..60),
        scale in 1e-3f64..1e3,
        offset in -1e3f64..1e3,
    ) {
        let x = TimeSeries::from_values(start(), 12, &a).unwrap();
        let y = TimeSeries::from_values(start(), 12, &b).unwrap();
        let moved = x.map(|v| scale * v + offset).unwrap();
        let base = goodness_of_fit(&x, &y).unwrap().pearson;
        let after = goodness_of_fit(&moved, &y).unwrap().pearson;
        match (base, after) {
            (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-9, "{} vs {}", p, q),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..100), month in 0i64..2400) {
        let ts = TimeSeries::from_values(Month::from_index(1900 * 12 + month), 12, &values).unwrap();
        for units in [CsvUnits::Percent, CsvUnits::Fraction] {
            let mut buf = Vec::new();
            write_series(&ts, &mut buf, units).unwrap();
            let back = parse_series_csv::<f64, _>(buf.as_slice(), &CsvSchema::with_units(units)).unwrap().series;
            prop_assert_eq!(back.start(), ts.start());
            for (a, b) in values.iter().zip(back.values()) {
                prop_assert!((a - b.unwrap()).abs() <= 1e-12 * a.abs());
            }
        }
    }
}

fn profile() -> impl Strategy<Value = InflationProfile<f64>> {
    prop_oneof![
        (-0.05f64..0.15).prop_map(InflationProfile::Constant),
        (0.0f64..0.04, 0.05f64..0.15, 0.5f64..4.0, 0.5f64..4.0).prop_map(|(base, peak, rise_years, fall_years)| {
            InflationProfile::Hump {
                base,
                peak,
                rise_years,
                fall_years,
            }
        }),
        prop::collection::vec((0.5f64..6.0, -0.05f64..0.15), 1..5).prop_map(InflationProfile::Piecewise),
    ]
}

fn spec() -> impl Strategy<Value = SyntheticSpec<f64>> {
    (
        profile(),
        0usize..15,
        -0.02f64..0.1,
        -0.02f64..0.05,
        0.1f64..0.9,
        0.05f64..20.0,
        5.0f64..25.0,
    )
        .prop_map(
            |(
                inflation_profile,
                lag_samples,
                money_growth,
                output_growth,
                cost_price_ratio,
                proportionality,
                horizon_years,
            )| {
                SyntheticSpec {
                    inflation_profile,
                    lag_samples,
                    money_growth,
                    output_growth,
                    cost_price_ratio,
                    proportionality,
                    horizon_years,
                    ..SyntheticSpec::default()
                }
                .with_initial_spread(0.02)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_paths_satisfy_the_identity(spec in spec()) {
        let path = generate_path(&spec).unwrap();
        let residual = equality_residual(&path, spec.lag_samples).unwrap();
        let target = -spec.proportionality.ln();
        prop_assert_eq!(residual.missing_count(), 0);
        for (_, r) in residual.finite() {
            prop_assert!((r - target).abs() < 1e-10, "{} vs {}", r, target);
        }
    }

    #[test]
    fn proportionality_does_not_reach_prediction(spec in spec(), k in 0.05f64..20.0) {
        let spec = SyntheticSpec { i_short_level: 0.0, ..spec };
        let other = SyntheticSpec { proportionality: k, ..spec.clone() }.with_initial_spread(0.02 * k / spec.proportionality);
        let a = generate_path(&spec).unwrap();
        let b = generate_path(&other).unwrap();
        let params = no_floor().with_lag(spec.lag_samples);
        let pa = predict_full(&a.rates, &a.money, None, &params).unwrap().inflation;
        let pb = predict_full(&b.rates, &b.money, None, &params).unwrap().inflation;
        assert_close(&pa, &pb, 1e-12);
    }

    #[test]
    fn generation_is_deterministic(spec in spec(), seed in any::<u64>(), sigma in 0.0f64..0.2) {
        let a = generate_path(&spec).unwrap();
        prop_assert_eq!(&a, &generate_path(&spec).unwrap());
        prop_assert_eq!(inject_noise(&a, sigma, seed).unwrap(), inject_noise(&a, sigma, seed).unwrap());
    }

    #[test]
    fn fit_lag_recovers_its_own_prediction(values in positive_series(40), lag in 0usize..12, w in 0usize..3) {
        let r = rates(&values.iter().map(|v| 0.01 * v).collect::<Vec<_>>(), 0.02);
        let params = ModelParams::default().with_window(2 * w + 1);
        let actual = predict_simple(&r, &params.with_lag(lag)).unwrap().inflation;
        let grid: Vec<usize> = (0..12).collect();
        let fit = fit_lag(&r, None, None, &actual, &grid, &params, Objective::Rmse).unwrap();
        prop_assert_eq!(fit.best_lag, lag);
        prop_assert!(fit.best().metrics.rmse < 1e-9);
        let again = fit_lag(&r, None, None, &actual, &grid, &params, Objective::Rmse).unwrap();
        prop_assert_eq!(fit, again);
    }
}

fn constant_spec(rate: f64, lag: usize) -> SyntheticSpec<f64> {
    SyntheticSpec {
        inflation_profile: InflationProfile::Constant(rate),
        lag_samples: lag,
        money_growth: 0.04,
        output_growth: 0.02,
        horizon_years: 20.0,
        ..SyntheticSpec::default()
    }
    .with_initial_spread(0.03)
}

fn explicit_prediction(spec: &SyntheticSpec<f64>) -> TimeSeries<f64> {
    let path = generate_path(spec).unwrap();
    let params = ModelParams::default()
        .with_lag(spec.lag_samples)
        .with_n_mode(NMode::ExplicitN);
    predict_full(&path.rates, &path.money, Some(&path.output), &params)
        .unwrap()
        .inflation
}

#[test]
fn full_model_recovers_constant_inflation() {
    for (rate, lag) in [(0.03, 0), (0.10, 9), (-0.02, 6)] {
        let spec = constant_spec(rate, lag);
        let predicted = explicit_prediction(&spec);
        assert_eq!(predicted.missing_count(), 0);
        for (_, v) in predicted.finite() {
            assert!((v - rate).abs() < 1e-6, "{v} vs {rate}");
        }
    }
}

#[test]
fn full_model_tracks_piecewise_profile() {
    let spec = SyntheticSpec {
        inflation_profile: InflationProfile::Piecewise(vec![(3.0, 0.02), (4.0, 0.05), (3.0, 0.015)]),
        lag_samples: 6,
        money_growth: 0.05,
        output_growth: 0.01,
        horizon_years: 12.0,
        ..SyntheticSpec::default()
    }
    .with_initial_spread(0.03);
    let predicted = explicit_prediction(&spec);
    let truth = generate_path(&spec).unwrap().true_inflation.unwrap();
    let metrics = goodness_of_fit(&predicted, &truth).unwrap();
    assert!(metrics.n_points > 100);
    let (p, t) = spread_inflation::align(&predicted, &truth).unwrap();
    for k in 1..p.len() - 1 {
        let (Some(a), Some(b)) = (p.get(k), t.get(k)) else {
            continue;
        };
        // A stencil straddling a kink averages the rates on either side.
        assert!((a - b).abs() < 0.02, "sample {k}: {a} vs {b}");
    }
}

#[test]
fn noisy_residual_centres_on_log_proportionality() {
    let k = 2.5;
    let spec = SyntheticSpec {
        proportionality: k,
        horizon_years: 40.0,
        ..SyntheticSpec::default()
    }
    .with_initial_spread(0.03);
    let clean = generate_path(&spec).unwrap();
    let noisy = inject_noise(&clean, 0.05, 42).unwrap();
    let residual = equality_residual(&noisy, 0).unwrap();
    let xs: Vec<f64> = residual.finite().map(|(_, x)| x).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean + k.ln()).abs() < 3.0 * sd / n.sqrt(), "mean {mean} sd {sd}");
    assert_ne!(noisy, clean);
    assert_eq!(noisy.true_inflation, clean.true_inflation);
}

#[test]
fn spread_of_synthetic_rates_matches_construction() {
    let spec = constant_spec(0.05, 3);
    let path = generate_path(&spec).unwrap();
    let s = spread(&path.rates).unwrap();
    assert_eq!(s.len(), path.price.len() - 3);
    assert_relative_eq!(s.get(0).unwrap(), 0.03, max_relative = 1e-12);
}
