//! Decile portfolios, turnover, performance statistics and accuracy metrics.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deepseq::data::{build_windows_between, gen_synthetic, Exchange, Month, SynthSpec};
use deepseq::eval::{mse_oos, r2_oos, Forecast, ForecastSet};
use deepseq::portfolio::{
    backtest, form_portfolio, perf_stats, turnover, Candidate, Holdings, WeightMode,
};

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec((-1.0f64..1.0, 0.1f64..1000.0, 0u8..3), 20..80).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (p, cap, ex))| Candidate {
                asset_id: format!("S{i:03}"),
                predicted: p,
                market_cap: cap,
                exchange: [Exchange::Nyse, Exchange::Amex, Exchange::Nasdaq][ex as usize],
            })
            .collect()
    })
}

fn mode(value: bool) -> WeightMode {
    if value {
        WeightMode::Value
    } else {
        WeightMode::Equal
    }
}

fn month() -> Month {
    Month::new(1999, 6).unwrap()
}

fn forecast_set(pairs: &[(f64, f64)]) -> ForecastSet {
    ForecastSet::new(
        pairs
            .iter()
            .enumerate()
            .map(|(i, (r, p))| Forecast {
                asset_id: format!("S{i}"),
                month: month(),
                realized: *r,
                predicted: *p,
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn r2_hand_example_is_zero() {
    let set = forecast_set(&[(0.02, 0.01), (-0.01, 0.01)]);
    assert!(r2_oos(&set).unwrap().abs() < 1e-12);
    assert!((mse_oos(&forecast_set(&[(0.05, 0.02)])).unwrap() - 0.0009).abs() < 1e-15);
    assert!(r2_oos(&forecast_set(&[(0.0, 0.1), (0.0, 0.0)])).is_err());
    assert!(mse_oos(&ForecastSet::default()).is_err());
}

#[test]
fn random_forecasts_earn_no_sharpe() {
    let spec = SynthSpec {
        n_assets: 60,
        n_months: 373,
        momentum_coeff: 0.0,
        reversal_coeff: 0.0,
        seed: 21,
        ..SynthSpec::default()
    };
    let (panel, _) = gen_synthetic(&spec).unwrap();
    let first = panel.first_month().unwrap().offset(13);
    let windows = build_windows_between(&panel, first, panel.last_month().unwrap(), 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise: Vec<f64> = (0..windows.len()).map(|_| rng.random::<f64>()).collect();
    let set = common::forecasts(&windows, &noise);
    let result = backtest(&set, &panel, WeightMode::Equal, false).unwrap();
    assert_eq!(result.series.len(), 360);
    // the annualized Sharpe estimate has standard error about √(12/360)
    let sharpe = result.report.sharpe.unwrap();
    let se = (12.0f64 / 360.0).sqrt();
    assert!(sharpe.abs() < 4.0 * se, "sharpe {sharpe}");
}

#[test]
fn equal_forecasts_fall_back_to_the_tie_break() {
    let spec = SynthSpec {
        n_assets: 30,
        n_months: 30,
        seed: 2,
        ..SynthSpec::default()
    };
    let (panel, _) = gen_synthetic(&spec).unwrap();
    let first = panel.first_month().unwrap().offset(13);
    let windows = build_windows_between(&panel, first, panel.last_month().unwrap(), 12).unwrap();
    let set = common::forecasts(&windows, &vec![0.0; windows.len()]);
    let result = backtest(&set, &panel, WeightMode::Equal, false).unwrap();
    // ties sort by asset id: the last three names are long, the first three short
    for h in &result.holdings {
        let legs: Vec<(&str, f64)> = h.weights.iter().map(|(a, w)| (a.as_str(), *w)).collect();
        let third = 1.0 / 3.0;
        assert_eq!(
            legs,
            [
                ("S0000", -third),
                ("S0001", -third),
                ("S0002", -third),
                ("S0027", third),
                ("S0028", third),
                ("S0029", third)
            ]
        );
    }
    assert!(backtest(&set, &panel, WeightMode::Value, true).is_ok());
}

#[test]
fn gap_in_forecast_months_rejected() {
    let spec = SynthSpec {
        n_assets: 20,
        n_months: 30,
        seed: 2,
        ..SynthSpec::default()
    };
    let (panel, _) = gen_synthetic(&spec).unwrap();
    let first = panel.first_month().unwrap().offset(13);
    let windows = build_windows_between(&panel, first, panel.last_month().unwrap(), 12).unwrap();
    let skip = first.offset(3);
    let keep: Vec<Forecast> = common::forecasts(&windows, windows.targets())
        .records()
        .iter()
        .filter(|f| f.month != skip)
        .cloned()
        .collect();
    let set = ForecastSet::new(keep).unwrap();
    assert!(backtest(&set, &panel, WeightMode::Equal, false).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn legs_sum_to_plus_and_minus_one(c in candidates(), value: bool, filter: bool) {
        let h = form_portfolio(month(), &c, mode(value), filter);
        prop_assume!(h.is_ok());
        let h = h.unwrap();
        prop_assert!((h.long_sum() - 1.0).abs() < 1e-12);
        prop_assert!((h.short_sum() + 1.0).abs() < 1e-12);
        prop_assert_eq!(h.n_long(), h.n_short());
        prop_assert!(h.weights.keys().all(|a| c.iter().any(|x| &x.asset_id == a)));
    }

    #[test]
    fn increasing_maps_keep_the_holdings(c in candidates(), value: bool, filter: bool) {
        let h = form_portfolio(month(), &c, mode(value), filter);
        prop_assume!(h.is_ok());
        let mapped: Vec<Candidate> = c
            .iter()
            .map(|x| Candidate { predicted: (3.0 * x.predicted).exp() - 7.0, ..x.clone() })
            .collect();
        prop_assert_eq!(h.unwrap(), form_portfolio(month(), &mapped, mode(value), filter).unwrap());
    }

    #[test]
    fn zero_return_turnover_is_within_unit_bounds(a in candidates(), b in candidates(), value: bool) {
        let prev = form_portfolio(month(), &a, mode(value), false).unwrap();
        let next = form_portfolio(month().next(), &b, mode(value), false).unwrap();
        let zero: BTreeMap<String, f64> = prev.weights.keys().map(|k| (k.clone(), 0.0)).collect();
        let t = turnover(&prev, &zero, &next).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
        prop_assert_eq!(turnover(&prev, &zero, &prev).unwrap(), 0.0);
        // renaming every asset makes the two books disjoint
        let renamed = Holdings {
            month: next.month,
            weights: next.weights.iter().map(|(k, w)| (format!("X{k}"), *w)).collect(),
        };
        prop_assert!((turnover(&prev, &zero, &renamed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversal_keeps_the_moments(r in prop::collection::vec(-0.2f64..0.2, 3..60)) {
        let fwd = perf_stats(&r, &[]).unwrap();
        let rev: Vec<f64> = r.iter().rev().copied().collect();
        let bwd = perf_stats(&rev, &[]).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        prop_assert!(close(fwd.annualized_return, bwd.annualized_return));
        prop_assert!(close(fwd.annualized_std, bwd.annualized_std));
        if let (Some(a), Some(b)) = (fwd.skewness, bwd.skewness) {
            prop_assert!(close(a, b));
        }
        if let (Some(a), Some(b)) = (fwd.kurtosis, bwd.kurtosis) {
            prop_assert!(close(a, b));
        }
        prop_assert!(fwd.max_drawdown >= 0.0);
    }

    #[test]
    fn r2_identity_permutation_and_scale(
        pairs in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 2..60),
        shift in 0usize..60,
        k in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 10.0]),
    ) {
        prop_assume!(pairs.iter().any(|(r, _)| r.abs() > 1e-6));
        let set = forecast_set(&pairs);
        let r2 = r2_oos(&set).unwrap();
        let n = pairs.len() as f64;
        let ss: f64 = pairs.iter().map(|(r, _)| r * r).sum();
        prop_assert!((r2 - (1.0 - mse_oos(&set).unwrap() * n / ss)).abs() < 1e-12);
        let mut rotated = pairs.clone();
        rotated.rotate_left(shift % pairs.len());
        prop_assert!((r2_oos(&forecast_set(&rotated)).unwrap() - r2).abs() < 1e-12);
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|(r, p)| (k * r, k * p)).collect();
        prop_assert!((r2_oos(&forecast_set(&scaled)).unwrap() - r2).abs() < 1e-12);
    }
}
