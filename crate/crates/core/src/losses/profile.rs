use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::degradation::degradation_profile;
use super::performance::{daily_performance, PerformanceSeries};
use super::soiling::{analyze_soiling, SoilingConfig, SoilingResult};
use super::wiring::WiringSpec;
use crate::error::{Error, Result};
use crate::series::{day_ranges, ElectricalRecord, MeteoRecord, MonitoringRecord};

/// Compound loss `100·(1 − Π(1 − Lᵢ/100))`.
pub fn total_loss(factors: &[f64]) -> Result<f64> {
    let mut keep = 1.0;
    for f in factors {
        if !(0.0..=100.0).contains(f) {
            return Err(Error::input(format!("loss factor {f} outside [0, 100]")));
        }
        keep *= 1.0 - f / 100.0;
    }
    Ok(100.0 * (1.0 - keep))
}

/// `(1 − P_AC/P_DC)·100` clamped to `[0, 100]`; `None` when `P_DC <= 0`.
pub fn inverter_loss(p_dc: f64, p_ac: f64) -> Option<f64> {
    if p_dc > 0.0 {
        Some((100.0 * (1.0 - p_ac / p_dc)).clamp(0.0, 100.0))
    } else {
        None
    }
}

/// Loss percentages for one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyLoss {
    pub date: NaiveDate,
    pub soiling: f64,
    pub degradation: f64,
    pub dc_wiring: f64,
    pub ac_wiring: f64,
    pub inverter: f64,
    pub total: f64,
}

impl DailyLoss {
    pub fn factors(&self) -> [f64; 5] {
        [
            self.soiling,
            self.degradation,
            self.dc_wiring,
            self.ac_wiring,
            self.inverter,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    pub days: Vec<DailyLoss>,
}

impl LossProfile {
    /// Archive days falling in `year`-`month`.
    pub fn month(&self, year: i32, month: u32) -> Vec<&DailyLoss> {
        use chrono::Datelike;
        self.days
            .iter()
            .filter(|d| d.date.year() == year && d.date.month() == month)
            .collect()
    }
}

/// Everything the loss engine needs for one inverter.
#[derive(Debug, Clone)]
pub struct LossInputs<'a> {
    /// Measured monitoring data.
    pub measured: &'a [MonitoringRecord],
    /// Modelled array DC output aligned with `measured`; drives the DC wiring loss.
    pub simulated: &'a [ElectricalRecord],
    pub gamma_pmp: f64,
    pub dc_wiring: WiringSpec,
    pub ac_wiring: WiringSpec,
    /// Nominal AC voltage used to derive AC current.
    pub v_ac: f64,
    /// Degradation, percent per year.
    pub degradation_rate: f64,
    pub degradation_start: NaiveDate,
    pub soiling: SoilingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub profile: LossProfile,
    pub performance: PerformanceSeries,
    /// `None` when too few days were available for soiling extraction.
    pub soiling: Option<SoilingResult>,
}

/// Daily loss profile for a monitored inverter.
pub fn compute_loss_profile(inp: &LossInputs<'_>, seed: u64) -> Result<LossReport> {
    let n = inp.measured.len();
    if inp.simulated.len() != n {
        return Err(Error::input(format!(
            "simulated ({}) and measured ({n}) series differ in length",
            inp.simulated.len()
        )));
    }
    inp.dc_wiring.validate()?;
    inp.ac_wiring.validate()?;
    if !(inp.v_ac > 0.0) {
        return Err(Error::config("nominal AC voltage must be > 0"));
    }

    let meteo: Vec<MeteoRecord> = inp.measured.iter().map(|r| r.meteo()).collect();
    let elec: Vec<ElectricalRecord> = inp.measured.iter().map(|r| r.electrical()).collect();
    let performance = daily_performance(&meteo, &elec, inp.gamma_pmp)?;

    let soiling = if performance.days.len() >= inp.soiling.min_days.max(15) {
        let dates: Vec<NaiveDate> = performance.days.iter().map(|d| d.date).collect();
        let pm: Vec<f64> = performance.days.iter().map(|d| d.pm_norm).collect();
        let h: Vec<f64> = performance.days.iter().map(|d| d.insolation).collect();
        Some(analyze_soiling(&dates, &pm, &h, &inp.soiling, seed)?)
    } else {
        None
    };
    let soiling_by_day: BTreeMap<NaiveDate, f64> = soiling
        .as_ref()
        .map(|s| {
            s.dates
                .iter()
                .zip(&s.median_profile)
                .map(|(d, r)| (*d, 100.0 * (1.0 - r.clamp(0.0, 1.0))))
                .collect()
        })
        .unwrap_or_default();

    let r_dc = inp.dc_wiring.resistance();
    let r_ac = inp.ac_wiring.resistance();
    let days = day_ranges(inp.measured, |r| r.timestamp);
    let dates: Vec<NaiveDate> = days.iter().map(|d| d.0).collect();
    let degradation = degradation_profile(inp.degradation_start, &dates, inp.degradation_rate)?;

    let mut out = Vec::with_capacity(days.len());
    let mut last_soiling = soiling_by_day.values().next().copied().unwrap_or(0.0);
    for ((date, range), degr) in days.into_iter().zip(degradation) {
        let (mut dc_loss, mut dc_ref, mut ac_loss, mut ac_ref, mut p_dc, mut p_ac) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for k in range {
            let (m, s) = (&inp.measured[k], &inp.simulated[k]);
            if m.timestamp != s.timestamp {
                return Err(Error::input(format!("simulated series misaligned at {}", m.timestamp)));
            }
            if s.p_dc > 0.0 {
                dc_loss += s.i_dc * s.i_dc * r_dc;
                dc_ref += s.p_dc;
            }
            if m.p_ac > 0.0 {
                let i_ac = m.p_ac / inp.v_ac;
                ac_loss += i_ac * i_ac * r_ac;
                ac_ref += m.p_ac;
            }
            if m.p_dc > 0.0 {
                p_dc += m.p_dc;
                p_ac += m.p_ac;
            }
        }
        let pct = |loss: f64, reference: f64| {
            if reference > 0.0 {
                (100.0 * loss / reference).min(100.0)
            } else {
                0.0
            }
        };
        if let Some(v) = soiling_by_day.get(&date) {
            last_soiling = *v;
        }
        let mut day = DailyLoss {
            date,
            soiling: last_soiling,
            degradation: degr.clamp(0.0, 100.0),
            dc_wiring: pct(dc_loss, dc_ref),
            ac_wiring: pct(ac_loss, ac_ref),
            inverter: inverter_loss(p_dc, p_ac).unwrap_or(0.0),
            total: 0.0,
        };
        day.total = total_loss(&day.factors())?;
        out.push(day);
    }
    Ok(LossReport {
        profile: LossProfile { days: out },
        performance,
        soiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn composition_anchors() {
        assert_eq!(total_loss(&[0.0]).unwrap(), 0.0);
        assert_eq!(total_loss(&[]).unwrap(), 0.0);
        assert!((total_loss(&[50.0, 50.0]).unwrap() - 75.0).abs() < 1e-12);
        assert!((total_loss(&[10.0, 20.0, 30.0]).unwrap() - 49.6).abs() < 1e-12);
        assert!(total_loss(&[120.0]).is_err());
    }

    #[test]
    fn inverter_loss_cases() {
        assert_eq!(inverter_loss(100.0, 100.0), Some(0.0));
        assert!((inverter_loss(100.0, 98.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(inverter_loss(0.0, 0.0), None);
        assert_eq!(inverter_loss(100.0, 120.0), Some(0.0));
    }

    proptest! {
        #[test]
        fn total_is_monotone_and_bounded(f in proptest::collection::vec(0.0f64..=100.0, 0..8), extra in 0.0f64..=100.0) {
            let t = total_loss(&f).unwrap();
            let mut g = f.clone();
            g.push(extra);
            let t2 = total_loss(&g).unwrap();
            prop_assert!(t2 >= t - 1e-12);
            prop_assert!(t2 <= 100.0 + 1e-12);
            let mut r = f.clone();
            r.reverse();
            prop_assert!((total_loss(&r).unwrap() - t).abs() < 1e-9);
        }
    }
}
