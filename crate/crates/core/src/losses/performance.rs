use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{day_ranges, hour_of_day, ElectricalRecord, MeteoRecord, STEP_HOURS};
use crate::stats::quantile;

/// Daylight window used for the performance metric, local hours `[start, end)`.
pub const DAYLIGHT_HOURS: (f64, f64) = (6.0, 18.0);

/// `P_AC / (1 + γ·(T_cell − 25))`.
pub fn temperature_correct(p_ac: f64, t_cell: f64, gamma_pmp: f64) -> Result<f64> {
    let factor = 1.0 + gamma_pmp * (t_cell - 25.0);
    if factor <= 0.0 {
        return Err(Error::numerical(format!(
            "temperature correction factor {factor} <= 0 at T_cell = {t_cell}"
        )));
    }
    Ok(p_ac / factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyPerformance {
    pub date: NaiveDate,
    /// Temperature-corrected AC energy, Wh.
    pub energy: f64,
    /// Plane-of-array insolation, Wh/m².
    pub insolation: f64,
    pub pm: f64,
    pub pm_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSeries {
    pub days: Vec<DailyPerformance>,
    /// Days with zero insolation, left out of `days`.
    pub excluded: Vec<NaiveDate>,
    /// 95th percentile of `pm` used for normalisation.
    pub p95: f64,
}

/// Daily performance metric `PM = E/H` over the 6:00–18:00 window, normalised by
/// its 95th percentile.
pub fn daily_performance(
    meteo: &[MeteoRecord],
    elec: &[ElectricalRecord],
    gamma_pmp: f64,
) -> Result<PerformanceSeries> {
    if meteo.len() != elec.len() {
        return Err(Error::input(format!(
            "meteo ({}) and electrical ({}) series differ in length",
            meteo.len(),
            elec.len()
        )));
    }
    let mut days = Vec::new();
    let mut excluded = Vec::new();
    for (date, range) in day_ranges(meteo, |m| m.timestamp) {
        let mut energy = 0.0;
        let mut insolation = 0.0;
        for k in range {
            let (m, e) = (&meteo[k], &elec[k]);
            if m.timestamp != e.timestamp {
                return Err(Error::input(format!(
                    "series misaligned at {} / {}",
                    m.timestamp, e.timestamp
                )));
            }
            let h = hour_of_day(&m.timestamp);
            if h < DAYLIGHT_HOURS.0 || h >= DAYLIGHT_HOURS.1 {
                continue;
            }
            energy += temperature_correct(e.p_ac, m.t_cell, gamma_pmp)? * STEP_HOURS;
            insolation += m.g_poa * STEP_HOURS;
        }
        if insolation > 0.0 {
            days.push(DailyPerformance {
                date,
                energy,
                insolation,
                pm: energy / insolation,
                pm_norm: 0.0,
            });
        } else {
            excluded.push(date);
        }
    }
    let pms: Vec<f64> = days.iter().map(|d| d.pm).collect();
    let p95 = quantile(&pms, 0.95);
    if !days.is_empty() && !(p95 > 0.0) {
        return Err(Error::input("performance metric is zero on every day"));
    }
    for d in &mut days {
        d.pm_norm = d.pm / p95;
    }
    Ok(PerformanceSeries { days, excluded, p95 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::slot_time;

    fn day(date: NaiveDate, g: f64, p: f64, t: f64) -> (Vec<MeteoRecord>, Vec<ElectricalRecord>) {
        (0..288)
            .map(|s| {
                let ts = slot_time(date, s);
                let (g, p) = if (72..216).contains(&s) { (g, p) } else { (0.0, 0.0) };
                (
                    MeteoRecord {
                        timestamp: ts,
                        ghi: g,
                        g_poa: g,
                        t_amb: t,
                        t_cell: t,
                    },
                    ElectricalRecord {
                        timestamp: ts,
                        i_dc: 0.0,
                        v_dc: 0.0,
                        p_dc: p,
                        p_ac: p,
                    },
                )
            })
            .unzip()
    }

    fn d0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap()
    }

    #[test]
    fn temperature_correction_cases() {
        assert_eq!(temperature_correct(1000.0, 25.0, -0.0036).unwrap(), 1000.0);
        assert_eq!(temperature_correct(1000.0, 60.0, 0.0).unwrap(), 1000.0);
        let v = temperature_correct(1000.0, 45.0, -0.0036).unwrap();
        assert!((v - 1077.586_206_896_551_7).abs() < 1e-9);
        assert!(temperature_correct(1000.0, 400.0, -0.0036).is_err());
    }

    #[test]
    fn constant_day_ratio() {
        let (m, e) = day(d0(), 800.0, 40_000.0, 25.0);
        let s = daily_performance(&m, &e, -0.0036).unwrap();
        assert_eq!(s.days.len(), 1);
        assert!((s.days[0].pm - 50.0).abs() < 1e-12);
        assert!((s.days[0].energy - 40_000.0 * 12.0).abs() < 1e-6);
        assert!((s.days[0].pm_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_days_normalise_to_one() {
        let (mut m, mut e) = (Vec::new(), Vec::new());
        for k in 0..10 {
            let (a, b) = day(d0() + chrono::Days::new(k), 700.0, 30_000.0, 40.0);
            m.extend(a);
            e.extend(b);
        }
        let s = daily_performance(&m, &e, -0.0036).unwrap();
        assert!(s.days.iter().all(|d| (d.pm_norm - 1.0).abs() < 1e-12));
    }

    #[test]
    fn linear_decay_is_preserved() {
        let (mut m, mut e) = (Vec::new(), Vec::new());
        for k in 0..60u64 {
            let ratio = 1.0 - 0.002 * k as f64;
            let (a, b) = day(d0() + chrono::Days::new(k), 700.0, 30_000.0 * ratio, 25.0);
            m.extend(a);
            e.extend(b);
        }
        let s = daily_performance(&m, &e, -0.0036).unwrap();
        let first = s.days[0].pm_norm;
        for (k, d) in s.days.iter().enumerate() {
            let expect = first * (1.0 - 0.002 * k as f64);
            assert!((d.pm_norm - expect).abs() / expect < 0.01);
        }
    }

    #[test]
    fn dark_days_are_excluded() {
        let (mut m, mut e) = day(d0(), 0.0, 0.0, 20.0);
        let (a, b) = day(d0().succ_opt().unwrap(), 500.0, 20_000.0, 20.0);
        m.extend(a);
        e.extend(b);
        let s = daily_performance(&m, &e, -0.0036).unwrap();
        assert_eq!(s.excluded, vec![d0()]);
        assert_eq!(s.days.len(), 1);
    }
}
