//! Labelled synthetic dataset with the standard fault set.

use chrono::NaiveDate;
use pvtwin::faults::{build_dataset, DatasetInputs, FaultSpec};
use pvtwin::losses::LossProfile;
use pvtwin::reference::{reference_end, reference_start, reference_weather};
use pvtwin::simulate::SystemSpec;
use pvtwin::synth::{build_envelopes, classify_days, month_category_weights, synthesize_days, TemperaturePools};
use std::collections::BTreeMap;

fn main() -> pvtwin::Result<()> {
    let loc = pvtwin::geometry::GeoLocation::bogota();
    let sys = SystemSpec::reference_b();
    let meteo = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 5)?.records();
    let classes = classify_days(&meteo, &loc, &sys.orientation)?;
    let days = synthesize_days(
        &build_envelopes(&meteo, &classes),
        &TemperaturePools::build(&meteo, &classes, sys.module.t_noct),
        &month_category_weights(&classes),
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(),
        10,
        1,
    )?;
    let faults = FaultSpec::standard_set();
    for f in &faults {
        let t: Vec<String> = f
            .targets
            .iter()
            .map(|t| format!("{} {:?} {}..{}%", t.signal, t.effect, t.min, t.max))
            .collect();
        println!("{:4} {}", f.name, t.join(", "));
    }

    let ds = build_dataset(
        &DatasetInputs {
            system: &sys,
            location: &loc,
            days: &days,
            losses: &LossProfile::default(),
            faults: &faults,
        },
        2,
    )?;
    let daylight = ds.faulted.iter().filter(|r| r.g_poa > 0.0).count();
    println!(
        "\n{} rows, {daylight} in daylight, {} labelled faulty",
        ds.faulted.len(),
        ds.labels.positives()
    );
    let mut per_fault: BTreeMap<&str, usize> = BTreeMap::new();
    for e in ds.schedules.iter().flat_map(|s| &s.events) {
        *per_fault.entry(&e.name).or_default() += 1;
    }
    for (name, n) in per_fault {
        println!("  {name:4} {n:5} points");
    }
    Ok(())
}
