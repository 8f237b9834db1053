use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::sampling::{archive_month_for, sample_daily_losses};
use super::schedule::{apply_faults, generate_fault_schedule, FaultSchedule, LabelSeries};
use super::spec::FaultSpec;
use crate::error::{Error, Result};
use crate::geometry::GeoLocation;
use crate::losses::{DailyLoss, LossProfile};
use crate::rng::derive_seed;
use crate::series::{days_in_month, slot_time, MeteoRecord};
use crate::simulate::{apply_losses, simulate_point, ProductionSample, SystemSpec};
use crate::synth::{clear_sky_day, daily_clearness, DayClass, SkyCategory, SynthDay};

/// One labelled row of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthRow {
    pub timestamp: NaiveDateTime,
    pub category: SkyCategory,
    /// Daily clearness index of the row's day.
    pub k: f64,
    pub g_poa: f64,
    pub t_amb: f64,
    pub t_cell: f64,
    pub i_l: f64,
    pub i_sc: f64,
    pub v_oc: f64,
    pub i_dc: f64,
    pub v_dc: f64,
    pub p_dc: f64,
    pub p_ac: f64,
    /// `P_DC / (G_POA · array area)`, 0 in the dark.
    pub eta_cell: f64,
    /// `P_AC / P_DC`, 0 when there is no DC power.
    pub eta_inv: f64,
    pub label: u8,
}

impl SynthRow {
    pub fn new(s: &ProductionSample, category: SkyCategory, k: f64, area: f64, label: u8) -> Self {
        SynthRow {
            timestamp: s.timestamp,
            category,
            k,
            g_poa: s.g_poa,
            t_amb: s.t_amb,
            t_cell: s.t_cell,
            i_l: s.i_l,
            i_sc: s.i_sc,
            v_oc: s.v_oc,
            i_dc: s.i_dc,
            v_dc: s.v_dc,
            p_dc: s.p_dc,
            p_ac: s.p_ac,
            eta_cell: if s.g_poa > 0.0 { s.p_dc / (s.g_poa * area) } else { 0.0 },
            eta_inv: if s.p_dc > 0.0 { s.p_ac / s.p_dc } else { 0.0 },
            label,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetInputs<'a> {
    pub system: &'a SystemSpec,
    pub location: &'a GeoLocation,
    /// Synthetic weather with temperatures filled, consecutive or not.
    pub days: &'a [SynthDay],
    /// Historical daily losses; empty means loss-free production.
    pub losses: &'a LossProfile,
    /// Empty means no faults.
    pub faults: &'a [FaultSpec],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    /// Production with sampled losses, no faults.
    pub clean: Vec<SynthRow>,
    /// Same production with faults applied; `label` set.
    pub faulted: Vec<SynthRow>,
    pub labels: LabelSeries,
    pub schedules: Vec<FaultSchedule>,
    pub magnitude_columns: Vec<String>,
    pub magnitudes: Vec<Vec<f64>>,
    pub losses: Vec<DailyLoss>,
    pub days: Vec<DayClass>,
}

/// Per-day losses covering `dates`, each synthetic month drawing one archive day.
fn monthly_losses(archive: &LossProfile, dates: &[NaiveDate], seed: u64) -> Result<BTreeMap<NaiveDate, DailyLoss>> {
    let mut out = BTreeMap::new();
    if archive.days.is_empty() {
        return Ok(out);
    }
    let months: std::collections::BTreeSet<(i32, u32)> = dates.iter().map(|d| (d.year(), d.month())).collect();
    for (y, m) in months {
        let (ay, am) = archive_month_for(archive, y, m)
            .ok_or_else(|| Error::input(format!("loss archive has no data for month {m:02}")))?;
        let s = derive_seed(seed, "loss-month", (y as u64) * 12 + m as u64);
        let sampled = sample_daily_losses(archive, ay, am, s)?;
        for d in 1..=days_in_month(y, m) {
            let date = NaiveDate::from_ymd_opt(y, m, d).expect("valid day");
            out.insert(date, DailyLoss { date, ..sampled[0] });
        }
    }
    Ok(out)
}

struct Day {
    class: DayClass,
    clean: Vec<ProductionSample>,
    schedule: FaultSchedule,
}

/// Turns synthetic weather into a labelled dataset: array production, the
/// month's sampled historical losses, then the fault schedule.
pub fn build_dataset(inp: &DatasetInputs<'_>, seed: u64) -> Result<SyntheticDataset> {
    inp.system.validate()?;
    if inp.days.is_empty() {
        return Err(Error::input("dataset needs at least one day"));
    }
    let dates: Vec<NaiveDate> = inp.days.iter().map(|d| d.date).collect();
    let losses = monthly_losses(inp.losses, &dates, seed)?;
    let area = inp.system.array_area();

    let days: Vec<Day> = inp
        .days
        .par_iter()
        .map(|day| -> Result<Day> {
            let date = day.date;
            if day.t_amb.len() != day.g_poa.len() || day.t_cell.len() != day.g_poa.len() {
                return Err(Error::input(format!("synthetic day {date} lacks temperatures")));
            }
            let cs = clear_sky_day(date, inp.location, &inp.system.orientation)?;
            let k = daily_clearness(&day.g_poa, &cs).unwrap_or(0.0);
            let loss = losses.get(&date);
            let clean = (0..day.g_poa.len())
                .map(|s| {
                    let m = MeteoRecord {
                        timestamp: slot_time(date, s),
                        ghi: day.g_poa[s],
                        g_poa: day.g_poa[s],
                        t_amb: day.t_amb[s],
                        t_cell: day.t_cell[s],
                    };
                    let p = simulate_point(inp.system, &m)?;
                    match loss {
                        Some(l) => apply_losses(&p, l, &inp.system.inverter),
                        None => Ok(p),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let schedule = if inp.faults.is_empty() {
                FaultSchedule::empty(date)
            } else {
                generate_fault_schedule(inp.faults, day, seed)?
            };
            Ok(Day {
                class: DayClass {
                    date,
                    k,
                    category: day.category,
                },
                clean,
                schedule,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let prod: Vec<ProductionSample> = days.iter().flat_map(|d| d.clean.iter().copied()).collect();
    let schedules: Vec<FaultSchedule> = days.iter().map(|d| d.schedule.clone()).collect();
    let faulted = apply_faults(&prod, &schedules, inp.faults, &inp.system.inverter, |d| {
        losses.get(&d).map_or(0.0, |l| l.ac_wiring)
    })?;

    let mut clean_rows = Vec::with_capacity(prod.len());
    let mut fault_rows = Vec::with_capacity(prod.len());
    let mut i = 0;
    for d in &days {
        for s in &d.clean {
            clean_rows.push(SynthRow::new(s, d.class.category, d.class.k, area, 0));
            let label = faulted.labels.labels[i];
            fault_rows.push(SynthRow::new(
                &faulted.samples[i],
                d.class.category,
                d.class.k,
                area,
                label,
            ));
            i += 1;
        }
    }
    Ok(SyntheticDataset {
        clean: clean_rows,
        faulted: fault_rows,
        labels: faulted.labels,
        schedules,
        magnitude_columns: faulted.columns,
        magnitudes: faulted.magnitudes,
        losses: dates.iter().filter_map(|d| losses.get(d).copied()).collect(),
        days: days.into_iter().map(|d| d.class).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{reference_start, reference_weather};
    use crate::synth::{build_envelopes, classify_days, month_category_weights, synthesize_days, TemperaturePools};

    #[test]
    fn small_dataset_is_consistent_and_deterministic() {
        let sys = SystemSpec::reference_a();
        let loc = GeoLocation::bogota();
        let start = reference_start();
        let end = start + chrono::Duration::days(59);
        let weather = reference_weather(&loc, &sys.orientation, start, end, 3).unwrap();
        let hist = weather.records();
        let classes = classify_days(&hist, &loc, &sys.orientation).unwrap();
        let env = build_envelopes(&hist, &classes);
        let pools = TemperaturePools::build(&hist, &classes, sys.module.t_noct);
        let weights = month_category_weights(&classes);
        let l = DailyLoss {
            date: start,
            soiling: 3.0,
            degradation: 0.2,
            dc_wiring: 0.7,
            ac_wiring: 0.2,
            inverter: 2.0,
            total: 0.0,
        };
        let archive = LossProfile {
            days: vec![
                l,
                DailyLoss {
                    date: start + chrono::Duration::days(40),
                    soiling: 5.0,
                    ..l
                },
            ],
        };
        let specs = FaultSpec::standard_set();
        let days = synthesize_days(
            &env,
            &pools,
            &weights,
            NaiveDate::from_ymd_opt(2023, 8, 30).unwrap(),
            3,
            4,
        )
        .unwrap();
        assert_eq!(
            days,
            synthesize_days(&env, &pools, &weights, days[0].date, 3, 4).unwrap()
        );
        let inp = DatasetInputs {
            system: &sys,
            location: &loc,
            days: &days,
            losses: &archive,
            faults: &specs,
        };
        let a = build_dataset(&inp, 21).unwrap();
        assert_eq!(a, build_dataset(&inp, 21).unwrap());
        assert_eq!(a.clean.len(), 3 * 288);
        assert_eq!(a.faulted.len(), a.clean.len());
        assert_eq!(a.losses.len(), 3);
        assert!(a.labels.positives() > 0);
        assert_eq!((a.losses[1].soiling, a.losses[2].soiling), (3.0, 5.0));
        for (c, f) in a.clean.iter().zip(&a.faulted) {
            assert_eq!(c.timestamp, f.timestamp);
            if f.label == 0 {
                assert_eq!(c.p_ac, f.p_ac);
            }
            if c.g_poa == 0.0 {
                assert_eq!((c.p_dc, f.label), (0.0, 0));
            } else if c.p_dc > 0.0 {
                assert!(c.eta_cell > 0.1 && c.eta_cell < 0.25, "{}", c.eta_cell);
            }
        }
    }
}
