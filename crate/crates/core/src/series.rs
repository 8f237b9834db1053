//! Timestamped 5-minute records shared across the crate.
//!
//! Timestamps are naive local standard time; the site's fixed UTC offset lives in
//! [`crate::geometry::GeoLocation`].

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use std::ops::Range;

pub const STEP_MINUTES: u32 = 5;
pub const SLOTS_PER_DAY: usize = 288;
/// Sampling interval in hours, used to integrate power into energy.
pub const STEP_HOURS: f64 = STEP_MINUTES as f64 / 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeteoRecord {
    pub timestamp: NaiveDateTime,
    pub ghi: f64,
    pub g_poa: f64,
    pub t_amb: f64,
    pub t_cell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalRecord {
    pub timestamp: NaiveDateTime,
    pub i_dc: f64,
    pub v_dc: f64,
    pub p_dc: f64,
    pub p_ac: f64,
}

/// One row of plant monitoring data (weather plus inverter-level production).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitoringRecord {
    pub timestamp: NaiveDateTime,
    pub ghi: f64,
    pub g_poa: f64,
    pub t_amb: f64,
    pub t_cell: f64,
    pub i_dc: f64,
    pub v_dc: f64,
    pub p_dc: f64,
    pub p_ac: f64,
    /// Daily accumulated energy as exported by the logger; advisory only.
    pub e_day: Option<f64>,
}

impl MonitoringRecord {
    pub fn meteo(&self) -> MeteoRecord {
        MeteoRecord {
            timestamp: self.timestamp,
            ghi: self.ghi,
            g_poa: self.g_poa,
            t_amb: self.t_amb,
            t_cell: self.t_cell,
        }
    }

    pub fn electrical(&self) -> ElectricalRecord {
        ElectricalRecord {
            timestamp: self.timestamp,
            i_dc: self.i_dc,
            v_dc: self.v_dc,
            p_dc: self.p_dc,
            p_ac: self.p_ac,
        }
    }
}

/// Index of the 5-minute slot of day containing `ts` (0..288).
pub fn slot_of(ts: &NaiveDateTime) -> usize {
    ((ts.hour() * 60 + ts.minute()) / STEP_MINUTES) as usize
}

pub fn slot_time(date: NaiveDate, slot: usize) -> NaiveDateTime {
    let minutes = (slot as u32) * STEP_MINUTES;
    date.and_time(NaiveTime::from_hms_opt(minutes / 60, minutes % 60, 0).expect("slot < 288"))
}

/// Fractional local hour of the day.
pub fn hour_of_day(ts: &NaiveDateTime) -> f64 {
    ts.hour() as f64 + ts.minute() as f64 / 60.0 + ts.second() as f64 / 3600.0
}

/// Contiguous same-date runs of a timestamp-sorted sequence.
pub fn day_ranges<T>(items: &[T], ts: impl Fn(&T) -> NaiveDateTime) -> Vec<(NaiveDate, Range<usize>)> {
    let mut out: Vec<(NaiveDate, Range<usize>)> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let d = ts(item).date();
        match out.last_mut() {
            Some((last, r)) if *last == d => r.end = i + 1,
            _ => out.push((d, i..i + 1)),
        }
    }
    out
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    next.and_then(|n| n.pred_opt()).map(|d| d.day()).unwrap_or(28)
}

/// Every 5-minute timestamp of `date`.
pub fn day_timestamps(date: NaiveDate) -> Vec<NaiveDateTime> {
    (0..SLOTS_PER_DAY).map(|s| slot_time(date, s)).collect()
}
