//! 5-fold cross validation of the signal estimators on a synthetic dataset.
//!
//! cargo run --release --example neural_estimator -- v_oc 120

use chrono::NaiveDate;
use pvtwin::faults::{build_dataset, DatasetInputs};
use pvtwin::losses::LossProfile;
use pvtwin::nn::{self, kfold_cv, NetworkConfig, TargetSignal};
use pvtwin::reference::{reference_end, reference_start, reference_weather};
use pvtwin::simulate::SystemSpec;
use pvtwin::synth::{build_envelopes, classify_days, month_category_weights, synthesize_days, TemperaturePools};

fn main() -> pvtwin::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let targets = match args.first() {
        Some(t) => vec![TargetSignal::parse(t)?],
        None => TargetSignal::ALL.to_vec(),
    };
    let n_days: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(60);

    let loc = pvtwin::geometry::GeoLocation::bogota();
    let sys = SystemSpec::reference_a();
    let meteo = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 5)?.records();
    let classes = classify_days(&meteo, &loc, &sys.orientation)?;
    let days = synthesize_days(
        &build_envelopes(&meteo, &classes),
        &TemperaturePools::build(&meteo, &classes, sys.module.t_noct),
        &month_category_weights(&classes),
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(),
        n_days,
        11,
    )?;
    let ds = build_dataset(
        &DatasetInputs {
            system: &sys,
            location: &loc,
            days: &days,
            losses: &LossProfile::default(),
            faults: &[],
        },
        0,
    )?;

    for t in targets {
        let data = nn::build_dataset(&ds.clean, t);
        let cfg = NetworkConfig {
            batch_size: NetworkConfig::scaled_batch(data.len()),
            ..NetworkConfig::with_hidden(t.default_hidden())
        };
        let cv = kfold_cv(&data, &cfg, 3)?;
        let r2: Vec<String> = cv
            .folds
            .iter()
            .map(|f| f.metrics.r2.map_or("n/a".into(), |v| format!("{v:.3}")))
            .collect();
        println!(
            "{t:8} rows {:6}  batch {:4}  R² folds [{}]  mean {:.3}  MeAPE {:.2}%  loss trend {}",
            data.len(),
            cfg.batch_size,
            r2.join(", "),
            cv.mean_r2().unwrap_or(f64::NAN),
            cv.mean_meape().unwrap_or(f64::NAN),
            if cv.loss_trend_ok() { "ok" } else { "rising" }
        );
    }
    Ok(())
}
