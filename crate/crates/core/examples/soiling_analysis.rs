//! Soiling extraction on the generated monitoring corpus: cleaning events,
//! interval slopes with 95% intervals, and the insolation-weighted ratio.

use pvtwin::losses::{analyze_soiling, daily_performance, SoilingConfig};
use pvtwin::reference::{reference_end, reference_monitoring, reference_start, reference_weather};
use pvtwin::simulate::SystemSpec;

fn main() -> pvtwin::Result<()> {
    let sys = SystemSpec::reference_a();
    let loc = pvtwin::geometry::GeoLocation::bogota();
    let weather = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 7)?;
    let corpus = reference_monitoring(&sys, &weather, 7)?;

    let meteo: Vec<_> = corpus.records.iter().map(|r| r.meteo()).collect();
    let elec: Vec<_> = corpus.records.iter().map(|r| r.electrical()).collect();
    let perf = daily_performance(&meteo, &elec, sys.module.gamma_pmp)?;
    let dates: Vec<_> = perf.days.iter().map(|d| d.date).collect();
    let pm: Vec<_> = perf.days.iter().map(|d| d.pm_norm).collect();
    let h: Vec<_> = perf.days.iter().map(|d| d.insolation).collect();

    let res = analyze_soiling(&dates, &pm, &h, &SoilingConfig::default(), 1)?;
    println!("{} analysed days, {} cleaning events", dates.len(), res.events.len());
    for e in &res.events {
        println!("  cleaning {e}");
    }
    println!("interval                    slope/day   95% CI");
    for iv in &res.intervals {
        println!(
            "{} .. {}  {:+.5}  [{:+.5}, {:+.5}]",
            iv.start, iv.end, iv.slope, iv.slope_ci_low, iv.slope_ci_high
        );
    }
    let truth_cleanings = corpus
        .soiling
        .windows(2)
        .filter(|w| w[1].ratio > w[0].ratio + 0.05)
        .count();
    println!("true large cleanings: {truth_cleanings}");
    println!(
        "r_s,H = {:.4} (95% {:.4} .. {:.4})",
        res.r_s_h, res.r_s_h_ci.0, res.r_s_h_ci.1
    );
    Ok(())
}
