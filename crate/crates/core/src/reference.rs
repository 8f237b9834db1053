//! Deterministic stand-in for the plant's monitoring export.
//!
//! The original 2019-08 to 2021-02 Bogotá dataset is proprietary, so the pipeline
//! and examples run on a generated corpus with the same shape: 5-minute records,
//! a month-dependent mix of sky conditions (no fully overcast days in January),
//! a soiling sawtooth with scheduled cleanings in January and August plus partial
//! rain cleanings, linear degradation, ohmic wiring losses, sensor noise and
//! missing days (heavier in the first two months). Ground truth is returned with
//! the records.

use chrono::{Datelike, NaiveDate};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{ArrayOrientation, GeoLocation};
use crate::losses::DailyLoss;
use crate::pv::snl_ac_power;
use crate::rng::{derive_seed, seeded, substream, Rng};
use crate::series::{hour_of_day, slot_time, MeteoRecord, MonitoringRecord, SLOTS_PER_DAY, STEP_HOURS};
use crate::simulate::{apply_losses, simulate_point, SystemSpec};
use crate::synth::{clear_sky_day, daily_clearness, SkyCategory};

pub fn reference_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 8, 1).expect("valid date")
}

pub fn reference_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 2, 28).expect("valid date")
}

/// Sky-category weights (SC1..SC5) per calendar month; bimodal wet seasons.
const MONTH_WEIGHTS: [[f64; 5]; 12] = [
    [0.00, 0.15, 0.35, 0.20, 0.30],
    [0.02, 0.18, 0.35, 0.20, 0.25],
    [0.05, 0.25, 0.35, 0.15, 0.20],
    [0.08, 0.32, 0.35, 0.12, 0.13],
    [0.08, 0.32, 0.35, 0.12, 0.13],
    [0.03, 0.20, 0.40, 0.17, 0.20],
    [0.03, 0.20, 0.40, 0.17, 0.20],
    [0.03, 0.20, 0.40, 0.17, 0.20],
    [0.04, 0.22, 0.38, 0.16, 0.20],
    [0.08, 0.32, 0.35, 0.12, 0.13],
    [0.08, 0.32, 0.35, 0.12, 0.13],
    [0.03, 0.20, 0.37, 0.18, 0.22],
];

/// Monthly mean ambient temperature, °C.
const MONTH_T_MEAN: [f64; 12] = [14.5, 14.8, 14.6, 14.4, 14.3, 13.9, 13.6, 13.8, 14.0, 14.1, 14.2, 14.3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherDayTruth {
    pub date: NaiveDate,
    pub category: SkyCategory,
    pub k: f64,
    /// Whether the data logger lost this day.
    pub missing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWeather {
    pub days: Vec<(WeatherDayTruth, Vec<MeteoRecord>)>,
}

impl ReferenceWeather {
    /// All records of non-missing days.
    pub fn records(&self) -> Vec<MeteoRecord> {
        self.days
            .iter()
            .filter(|(t, _)| !t.missing)
            .flat_map(|(_, r)| r.iter().copied())
            .collect()
    }
}

fn pick_category(rng: &mut Rng, month: u32) -> SkyCategory {
    let w = MONTH_WEIGHTS[(month - 1) as usize];
    let u: f64 = rng.random::<f64>() * w.iter().sum::<f64>();
    let mut acc = 0.0;
    for (c, wi) in SkyCategory::ALL.into_iter().zip(w) {
        acc += wi;
        if u < acc {
            return c;
        }
    }
    SkyCategory::Sc3
}

fn weather_day(
    date: NaiveDate,
    loc: &GeoLocation,
    orient: &ArrayOrientation,
    seed: u64,
) -> Result<(WeatherDayTruth, Vec<MeteoRecord>)> {
    let mut rng = substream(seed, "reference-weather", date.num_days_from_ce() as u64);
    let month = date.month();
    let category = pick_category(&mut rng, month);
    let (lo, hi) = category.k_range();
    let pad = 0.1 * (hi - lo);
    let k_target = rng.random_range(lo.max(0.03) + pad..hi.min(0.88) - pad);
    let amp = match category {
        SkyCategory::Sc1 => 0.3,
        SkyCategory::Sc2 | SkyCategory::Sc3 => 0.5,
        SkyCategory::Sc4 => 0.35,
        SkyCategory::Sc5 => 0.12,
    };
    let early_missing = date < NaiveDate::from_ymd_opt(2019, 10, 1).expect("valid date");
    let missing = rng.random::<f64>() < if early_missing { 0.2 } else { 0.02 };

    let cs = clear_sky_day(date, loc, orient)?;
    let mut x = 0.0f64;
    let rho: f64 = 0.9;
    let mut c: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x = rho * x + (1.0 - rho * rho).sqrt() * z;
            (k_target * (1.0 + amp * x)).clamp(0.0, 1.1)
        })
        .collect();
    for _ in 0..4 {
        let g: Vec<f64> = cs.iter().zip(&c).map(|(a, b)| a * b).collect();
        let k = daily_clearness(&g, &cs).unwrap_or(k_target);
        if k > 0.0 {
            let f = k_target / k;
            c.iter_mut().for_each(|v| *v = (*v * f).clamp(0.0, 1.1));
        }
    }

    let t_mean = MONTH_T_MEAN[(month - 1) as usize] + Normal::new(0.0, 0.8).expect("valid").sample(&mut rng);
    let swing = 4.0 + 8.0 * k_target;
    let heat = 0.035 * (1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal));
    let mut t_noise = 0.0f64;
    let recs = (0..SLOTS_PER_DAY)
        .map(|s| {
            let ts = slot_time(date, s);
            let sensor = 1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal);
            let mut g = (cs[s] * c[s] * sensor).max(0.0);
            if g <= 1.5 {
                g = 0.0;
            }
            let h = hour_of_day(&ts);
            t_noise = 0.95 * t_noise + 0.3 * rng.sample::<f64, _>(StandardNormal);
            let t_amb = t_mean + 0.5 * swing * (2.0 * std::f64::consts::PI * (h - 8.75) / 24.0).sin() + t_noise;
            let t_cell = t_amb + heat * g + 0.8 * rng.sample::<f64, _>(StandardNormal);
            MeteoRecord {
                timestamp: ts,
                ghi: 0.985 * g,
                g_poa: g,
                t_amb,
                t_cell,
            }
        })
        .collect();
    Ok((
        WeatherDayTruth {
            date,
            category,
            k: k_target,
            missing,
        },
        recs,
    ))
}

/// Site weather for every day in `[start, end]`, including the days later
/// treated as lost.
pub fn reference_weather(
    loc: &GeoLocation,
    orient: &ArrayOrientation,
    start: NaiveDate,
    end: NaiveDate,
    seed: u64,
) -> Result<ReferenceWeather> {
    let dates: Vec<NaiveDate> = start.iter_days().take_while(|d| *d <= end).collect();
    let days = dates
        .par_iter()
        .map(|d| weather_day(*d, loc, orient, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceWeather { days })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoilingTruth {
    pub date: NaiveDate,
    /// Fraction of light reaching the cells, 1 = clean.
    pub ratio: f64,
}

/// Daily soiling ratio: accumulation at a per-interval rate, full cleanings on
/// 15 January and 15 August, partial cleanings on some overcast days.
pub fn soiling_truth(days: &[WeatherDayTruth], seed: u64) -> Vec<SoilingTruth> {
    let mut rng = seeded(derive_seed(seed, "reference-soiling", 0));
    let mut rate = rng.random_range(0.0008..0.0018);
    let mut ratio = 1.0f64;
    days.iter()
        .map(|d| {
            let scheduled = d.date.day() == 15 && (d.date.month() == 1 || d.date.month() == 8);
            if scheduled {
                ratio = 1.0;
                rate = rng.random_range(0.0008..0.0018);
            } else {
                let rainy = matches!(d.category, SkyCategory::Sc1 | SkyCategory::Sc2);
                if rainy && rng.random::<f64>() < 0.15 {
                    ratio += 0.3 * (1.0 - ratio);
                }
                ratio = (ratio - rate).max(0.6);
            }
            SoilingTruth { date: d.date, ratio }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCorpus {
    pub system: String,
    pub records: Vec<MonitoringRecord>,
    pub weather: Vec<WeatherDayTruth>,
    pub soiling: Vec<SoilingTruth>,
    /// Degradation applied, percent per year.
    pub degradation_rate: f64,
}

/// Monitoring records of `sys` under the given weather.
pub fn reference_monitoring(sys: &SystemSpec, weather: &ReferenceWeather, seed: u64) -> Result<ReferenceCorpus> {
    let truth: Vec<WeatherDayTruth> = weather.days.iter().map(|d| d.0).collect();
    let soiling = soiling_truth(&truth, derive_seed(seed, &sys.name, 0));
    let start = truth.first().map(|t| t.date).unwrap_or_else(reference_start);
    let rate = 0.5;
    let r_dc = sys.dc_wiring.resistance();
    let r_ac = sys.ac_wiring.resistance();

    let per_day = weather
        .days
        .par_iter()
        .zip(soiling.par_iter())
        .filter(|((t, _), _)| !t.missing)
        .map(|((t, recs), soil)| -> Result<Vec<MonitoringRecord>> {
            let mut rng = substream(
                seed,
                &format!("reference-electrical-{}", sys.name),
                t.date.num_days_from_ce() as u64,
            );
            let degradation = rate * (t.date - start).num_days() as f64 / 365.0;
            let mut e_day = 0.0;
            let mut out = Vec::with_capacity(recs.len());
            for m in recs {
                let clean = simulate_point(sys, m)?;
                let mut loss = DailyLoss {
                    date: t.date,
                    soiling: 100.0 * (1.0 - soil.ratio),
                    degradation,
                    dc_wiring: 0.0,
                    ac_wiring: 0.0,
                    inverter: 0.0,
                    total: 0.0,
                };
                let pre = apply_losses(&clean, &loss, &sys.inverter)?;
                if pre.p_dc > 0.0 {
                    loss.dc_wiring = (100.0 * pre.i_dc * pre.i_dc * r_dc / pre.p_dc).min(100.0);
                }
                let p_ac_in = snl_ac_power(pre.p_dc * (1.0 - loss.dc_wiring / 100.0), pre.v_dc, &sys.inverter)?;
                if p_ac_in > 0.0 {
                    let i_ac = p_ac_in / sys.inverter.v_ac;
                    loss.ac_wiring = (100.0 * i_ac * i_ac * r_ac / p_ac_in).min(100.0);
                }
                let s = apply_losses(&clean, &loss, &sys.inverter)?;
                let mut n = || 1.0 + 0.005 * rng.sample::<f64, _>(StandardNormal);
                let (v_dc, p_dc, p_ac) = if s.p_dc > 0.0 {
                    (s.v_dc * n(), s.p_dc * n(), s.p_ac * n())
                } else {
                    (0.0, 0.0, 0.0)
                };
                let i_dc = if v_dc > 0.0 { p_dc / v_dc } else { 0.0 };
                e_day += p_ac * STEP_HOURS;
                out.push(MonitoringRecord {
                    timestamp: m.timestamp,
                    ghi: m.ghi,
                    g_poa: m.g_poa,
                    t_amb: m.t_amb,
                    t_cell: m.t_cell,
                    i_dc,
                    v_dc,
                    p_dc,
                    p_ac: p_ac.max(0.0),
                    e_day: Some(e_day),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceCorpus {
        system: sys.name.clone(),
        records: per_day.into_iter().flatten().collect(),
        weather: truth,
        soiling,
        degradation_rate: rate,
    })
}
