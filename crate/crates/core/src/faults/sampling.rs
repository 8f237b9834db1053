use chrono::{Datelike, NaiveDate};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::losses::{DailyLoss, LossProfile};
use crate::rng::substream;
use crate::series::days_in_month;

/// Archive `(year, month)` to draw from for a synthetic `year`-`month`: the same
/// month if archived, else that calendar month in the nearest archived year
/// (earlier year on ties).
pub fn archive_month_for(archive: &LossProfile, year: i32, month: u32) -> Option<(i32, u32)> {
    archive
        .days
        .iter()
        .filter(|d| d.date.month() == month)
        .map(|d| d.date.year())
        .min_by_key(|&y| ((y - year).abs(), y))
        .map(|y| (y, month))
}

/// One randomly chosen archive day of `year`-`month`, replicated over every day
/// of that month.
pub fn sample_daily_losses(archive: &LossProfile, year: i32, month: u32, seed: u64) -> Result<Vec<DailyLoss>> {
    let days = archive.month(year, month);
    if days.is_empty() {
        return Err(Error::input(format!("loss archive has no days in {year}-{month:02}")));
    }
    let mut rng = substream(seed, "loss-sample", (year as u64) << 4 | month as u64);
    let pick = *days[rng.random_range(0..days.len())];
    Ok((1..=days_in_month(year, month))
        .map(|d| DailyLoss {
            date: NaiveDate::from_ymd_opt(year, month, d).expect("valid day of month"),
            ..pick
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loss(date: NaiveDate, s: f64) -> DailyLoss {
        DailyLoss {
            date,
            soiling: s,
            degradation: 0.3,
            dc_wiring: 0.8,
            ac_wiring: 0.1,
            inverter: 2.0,
            total: 0.0,
        }
    }

    fn archive() -> LossProfile {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let mut days: Vec<_> = start
            .iter_days()
            .take(60)
            .enumerate()
            .map(|(i, d)| loss(d, i as f64 * 0.1))
            .collect();
        days.push(loss(NaiveDate::from_ymd_opt(2020, 7, 9).unwrap(), 4.2));
        LossProfile { days }
    }

    #[test]
    fn singleton_month_replicated() {
        let out = sample_daily_losses(&archive(), 2020, 7, 1).unwrap();
        assert_eq!(out.len(), 31);
        assert!(out.iter().all(|d| d.soiling == 4.2 && d.date.month() == 7));
        assert_eq!(out[30].date.day(), 31);
    }

    #[test]
    fn january_gives_31_identical_rows() {
        let a = archive();
        let out = sample_daily_losses(&a, 2020, 1, 9).unwrap();
        assert_eq!(out.len(), 31);
        assert!(out.iter().all(|d| d.factors() == out[0].factors()));
        assert_eq!(out, sample_daily_losses(&a, 2020, 1, 9).unwrap());
        let picks: std::collections::BTreeSet<_> = (0..40)
            .map(|s| sample_daily_losses(&a, 2020, 1, s).unwrap()[0].soiling.to_bits())
            .collect();
        assert!(picks.len() > 5);
    }

    #[test]
    fn absent_month_is_input_error() {
        assert!(matches!(
            sample_daily_losses(&archive(), 2020, 5, 1),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn month_mapping() {
        let a = archive();
        assert_eq!(archive_month_for(&a, 2020, 2), Some((2020, 2)));
        assert_eq!(archive_month_for(&a, 2035, 7), Some((2020, 7)));
        assert_eq!(archive_month_for(&a, 2030, 5), None);
    }
}
