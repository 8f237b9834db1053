//! Daily loss profile of both reference systems, summarised per month.

use chrono::Datelike;
use pvtwin::losses::{compute_loss_profile, LossInputs, SoilingConfig};
use pvtwin::reference::{reference_end, reference_monitoring, reference_start, reference_weather};
use pvtwin::simulate::{simulate_series, SystemSpec};
use std::collections::BTreeMap;

fn main() -> pvtwin::Result<()> {
    let loc = pvtwin::geometry::GeoLocation::bogota();
    for sys in [SystemSpec::reference_a(), SystemSpec::reference_b()] {
        let weather = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 3)?;
        let corpus = reference_monitoring(&sys, &weather, 3)?;
        let meteo: Vec<_> = corpus.records.iter().map(|r| r.meteo()).collect();
        let sim = simulate_series(&sys, &meteo)?;
        let simulated: Vec<_> = sim
            .iter()
            .map(|s| pvtwin::series::ElectricalRecord {
                timestamp: s.timestamp,
                i_dc: s.i_dc,
                v_dc: s.v_dc,
                p_dc: s.p_dc,
                p_ac: s.p_ac,
            })
            .collect();
        let rep = compute_loss_profile(
            &LossInputs {
                measured: &corpus.records,
                simulated: &simulated,
                gamma_pmp: sys.module.gamma_pmp,
                dc_wiring: sys.dc_wiring,
                ac_wiring: sys.ac_wiring,
                v_ac: sys.inverter.v_ac,
                degradation_rate: 0.5,
                degradation_start: reference_start(),
                soiling: SoilingConfig::default(),
            },
            1,
        )?;

        println!("\nSystem {}  month    soil   degr  dc_w  ac_w   inv   total", sys.name);
        let mut months: BTreeMap<(i32, u32), Vec<[f64; 6]>> = BTreeMap::new();
        for d in &rep.profile.days {
            let f = d.factors();
            months
                .entry((d.date.year(), d.date.month()))
                .or_default()
                .push([f[0], f[1], f[2], f[3], f[4], d.total]);
        }
        for ((y, m), v) in months {
            let mean = |k: usize| v.iter().map(|x| x[k]).sum::<f64>() / v.len() as f64;
            println!(
                "          {y}-{m:02}  {:5.2}  {:5.2}  {:4.2}  {:4.2}  {:4.2}  {:5.2}",
                mean(0),
                mean(1),
                mean(2),
                mean(3),
                mean(4),
                mean(5)
            );
        }
    }
    Ok(())
}
