//! Threshold detection on 30 faulted days with bands learnt from 60 clean days,
//! comparing band strategies.

use chrono::NaiveDate;
use pvtwin::detect::{detect_on_targets, max_magnitudes, Grouping, Strategy, TestSet};
use pvtwin::faults::{build_dataset, DatasetInputs, FaultSpec};
use pvtwin::losses::LossProfile;
use pvtwin::nn::TargetSignal;
use pvtwin::reference::{reference_end, reference_start, reference_weather};
use pvtwin::simulate::SystemSpec;
use pvtwin::synth::{build_envelopes, classify_days, month_category_weights, synthesize_days, TemperaturePools};

fn main() -> pvtwin::Result<()> {
    let loc = pvtwin::geometry::GeoLocation::bogota();
    let sys = SystemSpec::reference_a();
    let meteo = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 5)?.records();
    let classes = classify_days(&meteo, &loc, &sys.orientation)?;
    let days = synthesize_days(
        &build_envelopes(&meteo, &classes),
        &TemperaturePools::build(&meteo, &classes, sys.module.t_noct),
        &month_category_weights(&classes),
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(),
        90,
        21,
    )?;
    let (hist_days, test_days) = days.split_at(60);
    let none = LossProfile::default();
    let input = |d| DatasetInputs {
        system: &sys,
        location: &loc,
        days: d,
        losses: &none,
        faults: &[],
    };
    let history = build_dataset(&input(hist_days), 1)?.clean;
    let faults = FaultSpec::standard_set();
    let test = build_dataset(
        &DatasetInputs {
            faults: &faults,
            ..input(test_days)
        },
        2,
    )?;

    let history: Vec<_> = history.into_iter().filter(|r| r.g_poa > 0.0).collect();
    let rows: Vec<_> = test.faulted.into_iter().filter(|r| r.g_poa > 0.0).collect();
    let ts: Vec<_> = rows.iter().map(|r| r.timestamp).collect();
    let events: Vec<_> = test.schedules.into_iter().flat_map(|s| s.events).collect();
    let mags = max_magnitudes(&ts, &events);
    let set = TestSet {
        rows: &rows,
        max_magnitude: &mags,
    };

    println!("strategy          accuracy  recall  precision  recall>=50%");
    for s in Strategy::ALL {
        let r = detect_on_targets(&history, set, &TargetSignal::ALL, s, Grouping::SlotCategory)?;
        let f = &r.fused;
        println!(
            "{:16}  {:.3}     {:.3}   {:.3}      {:.3}",
            s.name(),
            f.accuracy,
            f.recall.unwrap_or(f64::NAN),
            f.precision.unwrap_or(f64::NAN),
            r.major_recall.unwrap_or(f64::NAN)
        );
        if s == Strategy::QuartileIqr {
            for sig in &r.signals {
                println!(
                    "    {:9} acc {:.3}  tp {:5} fp {:5} fn {:5} tn {:5}",
                    sig.signal, sig.accuracy, sig.confusion.tp, sig.confusion.fp, sig.confusion.fn_, sig.confusion.tn
                );
            }
        }
    }
    Ok(())
}
