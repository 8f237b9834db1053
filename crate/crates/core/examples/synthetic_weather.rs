//! Synthetic irradiance and temperature days drawn from historical envelopes.

use chrono::NaiveDate;
use pvtwin::reference::{reference_end, reference_start, reference_weather};
use pvtwin::simulate::SystemSpec;
use pvtwin::synth::{
    build_envelopes, classify_days, clear_sky_day, daily_clearness, month_category_weights, synthesize_days,
    TemperaturePools,
};

fn main() -> pvtwin::Result<()> {
    let loc = pvtwin::geometry::GeoLocation::bogota();
    let sys = SystemSpec::reference_a();
    let meteo = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 5)?.records();
    let classes = classify_days(&meteo, &loc, &sys.orientation)?;
    let env = build_envelopes(&meteo, &classes);
    let pools = TemperaturePools::build(&meteo, &classes, sys.module.t_noct);
    let weights = month_category_weights(&classes);

    let start = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let days = synthesize_days(&env, &pools, &weights, start, 14, 99)?;
    println!("date        drawn  k      insolation  T_amb max  T_cell max");
    for d in &days {
        let cs = clear_sky_day(d.date, &loc, &sys.orientation)?;
        let k = daily_clearness(&d.g_poa, &cs).unwrap_or(0.0);
        let h: f64 = d.g_poa.iter().sum::<f64>() / 12.0;
        let tmax = d.t_amb.iter().cloned().fold(f64::MIN, f64::max);
        let cmax = d.t_cell.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "{}  {}    {k:.3}  {:6.0} Wh/m²  {tmax:6.1} °C  {cmax:6.1} °C",
            d.date, d.category, h
        );
    }
    Ok(())
}
