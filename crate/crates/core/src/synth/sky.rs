use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Result;
use crate::geometry::{clear_sky_poa, ArrayOrientation, GeoLocation};
use crate::series::{day_ranges, slot_of, slot_time, MeteoRecord, SLOTS_PER_DAY};

/// Sky condition from the daily clearness index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SkyCategory {
    /// Completely overcast, `k ∈ [0, 0.2]`.
    Sc1,
    /// Mostly cloudy, `(0.2, 0.4]`.
    Sc2,
    /// Partly cloudy, `(0.4, 0.6]`.
    Sc3,
    /// Mostly clear, `(0.6, 0.67]`.
    Sc4,
    /// Completely clear, `(0.67, 1]`.
    Sc5,
}

impl SkyCategory {
    pub const ALL: [SkyCategory; 5] = [
        SkyCategory::Sc1,
        SkyCategory::Sc2,
        SkyCategory::Sc3,
        SkyCategory::Sc4,
        SkyCategory::Sc5,
    ];

    pub fn k_range(self) -> (f64, f64) {
        match self {
            SkyCategory::Sc1 => (0.0, 0.2),
            SkyCategory::Sc2 => (0.2, 0.4),
            SkyCategory::Sc3 => (0.4, 0.6),
            SkyCategory::Sc4 => (0.6, 0.67),
            SkyCategory::Sc5 => (0.67, 1.0),
        }
    }

    pub fn k_mid(self) -> f64 {
        let (a, b) = self.k_range();
        0.5 * (a + b)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["SC1", "SC2", "SC3", "SC4", "SC5"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        SkyCategory::ALL.into_iter().find(|c| c.label().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for SkyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Upper bounds are inclusive.
pub fn classify_sky(k: f64) -> SkyCategory {
    if k <= 0.2 {
        SkyCategory::Sc1
    } else if k <= 0.4 {
        SkyCategory::Sc2
    } else if k <= 0.6 {
        SkyCategory::Sc3
    } else if k <= 0.67 {
        SkyCategory::Sc4
    } else {
        SkyCategory::Sc5
    }
}

/// Instantaneous `G_POA / G_cs` clamped to `[0, 1]`; `None` when the clear-sky value is 0.
pub fn clearness_index(g_poa: f64, g_cs: f64) -> Option<f64> {
    (g_cs > 0.0).then(|| (g_poa / g_cs).clamp(0.0, 1.0))
}

/// Daily clearness `Σ G_POA / Σ G_cs` over slots with sun, clamped to `[0, 1]`.
pub fn daily_clearness(g_poa: &[f64], g_cs: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (g, c) in g_poa.iter().zip(g_cs) {
        if *c > 0.0 {
            num += g;
            den += c;
        }
    }
    (den > 0.0).then(|| (num / den).clamp(0.0, 1.0))
}

/// Clear-sky POA irradiance at every slot of `date`.
pub fn clear_sky_day(date: NaiveDate, loc: &GeoLocation, orient: &ArrayOrientation) -> Result<Vec<f64>> {
    (0..SLOTS_PER_DAY)
        .map(|s| clear_sky_poa(slot_time(date, s), loc, orient))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayClass {
    pub date: NaiveDate,
    pub k: f64,
    pub category: SkyCategory,
}

/// Clearness index and category for every day of a historical series.
pub fn classify_days(
    historical: &[MeteoRecord],
    loc: &GeoLocation,
    orient: &ArrayOrientation,
) -> Result<Vec<DayClass>> {
    let mut out = Vec::new();
    for (date, range) in day_ranges(historical, |m| m.timestamp) {
        let cs = clear_sky_day(date, loc, orient)?;
        let recs = &historical[range];
        let g: Vec<f64> = recs.iter().map(|m| m.g_poa).collect();
        let c: Vec<f64> = recs.iter().map(|m| cs[slot_of(&m.timestamp)]).collect();
        if let Some(k) = daily_clearness(&g, &c) {
            out.push(DayClass {
                date,
                k,
                category: classify_sky(k),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries_are_exact() {
        assert_eq!(classify_sky(0.0), SkyCategory::Sc1);
        assert_eq!(classify_sky(0.1), SkyCategory::Sc1);
        assert_eq!(classify_sky(0.2), SkyCategory::Sc1);
        assert_eq!(classify_sky(0.4), SkyCategory::Sc2);
        assert_eq!(classify_sky(0.5), SkyCategory::Sc3);
        assert_eq!(classify_sky(0.6), SkyCategory::Sc3);
        assert_eq!(classify_sky(0.67), SkyCategory::Sc4);
        assert_eq!(classify_sky(0.7), SkyCategory::Sc5);
        assert_eq!(classify_sky(1.0), SkyCategory::Sc5);
    }

    #[test]
    fn clearness_cases() {
        assert_eq!(clearness_index(500.0, 500.0), Some(1.0));
        assert_eq!(clearness_index(0.0, 500.0), Some(0.0));
        assert_eq!(clearness_index(600.0, 500.0), Some(1.0));
        assert_eq!(clearness_index(100.0, 0.0), None);
        assert_eq!(daily_clearness(&[0.0, 50.0, 100.0], &[0.0, 100.0, 100.0]), Some(0.75));
        assert_eq!(daily_clearness(&[1.0], &[0.0]), None);
    }

    #[test]
    fn labels_round_trip() {
        for c in SkyCategory::ALL {
            assert_eq!(SkyCategory::parse(c.label()), Some(c));
            let (lo, hi) = c.k_range();
            assert_eq!(classify_sky(hi), c);
            assert!(lo <= c.k_mid() && c.k_mid() <= hi);
        }
    }

    proptest! {
        #[test]
        fn classification_is_total_and_consistent(k in 0.0f64..=1.0) {
            let c = classify_sky(k);
            let (lo, hi) = c.k_range();
            prop_assert!(k <= hi);
            prop_assert!(k > lo || c == SkyCategory::Sc1);
        }
    }
}
