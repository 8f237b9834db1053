use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Linear degradation loss in percent: `rate · days_since_start / 365`.
pub fn degradation_profile(start: NaiveDate, dates: &[NaiveDate], annual_rate: f64) -> Result<Vec<f64>> {
    dates
        .iter()
        .map(|d| {
            let days = (*d - start).num_days();
            if days < 0 {
                return Err(Error::input(format!("date {d} precedes degradation start {start}")));
            }
            Ok(annual_rate * days as f64 / 365.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn anchors() {
        let s = d(2019, 8, 1);
        let v = degradation_profile(s, &[s, d(2020, 7, 31), d(2021, 2, 28)], 0.5).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.5).abs() < 1e-12);
        assert!((v[2] - 0.79).abs() <= 0.01);
        assert!(degradation_profile(s, &[d(2019, 7, 1)], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_elapsed_time(t in 0u64..2000, rate in 0.0f64..2.0) {
            let s = d(2019, 8, 1);
            let v = degradation_profile(s, &[s + chrono::Days::new(t), s + chrono::Days::new(2 * t)], rate).unwrap();
            prop_assert!((v[1] - 2.0 * v[0]).abs() <= 1e-12 * v[1].abs().max(1.0));
        }
    }
}
