use chrono::Datelike;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::sky::{DayClass, SkyCategory};
use crate::series::{day_ranges, slot_of, MeteoRecord, SLOTS_PER_DAY};

/// Per-slot irradiance range of one (month, category) bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyEnvelope {
    pub month: u32,
    pub category: SkyCategory,
    /// Number of historical days in the bucket.
    pub days: usize,
    pub min: Vec<f64>,
    pub mean: Vec<f64>,
    pub max: Vec<f64>,
}

impl DailyEnvelope {
    /// Envelope with identical min, mean and max.
    pub fn degenerate(month: u32, category: SkyCategory, profile: Vec<f64>) -> Self {
        DailyEnvelope {
            month,
            category,
            days: 1,
            min: profile.clone(),
            mean: profile.clone(),
            max: profile,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSet {
    pub envelopes: Vec<DailyEnvelope>,
}

impl EnvelopeSet {
    pub fn get(&self, month: u32, category: SkyCategory) -> Option<&DailyEnvelope> {
        self.envelopes
            .iter()
            .find(|e| e.month == month && e.category == category)
    }

    /// Envelope for the bucket, or the same month's category nearest in k.
    /// The flag is `true` when a fallback was used.
    pub fn resolve(&self, month: u32, category: SkyCategory) -> Option<(&DailyEnvelope, bool)> {
        if let Some(e) = self.get(month, category) {
            return Some((e, false));
        }
        self.envelopes
            .iter()
            .filter(|e| e.month == month)
            .min_by(|a, b| {
                let da = (a.category.k_mid() - category.k_mid()).abs();
                let db = (b.category.k_mid() - category.k_mid()).abs();
                da.total_cmp(&db).then(a.category.cmp(&b.category))
            })
            .map(|e| (e, true))
    }

    pub fn categories(&self, month: u32) -> Vec<SkyCategory> {
        self.envelopes
            .iter()
            .filter(|e| e.month == month)
            .map(|e| e.category)
            .collect()
    }
}

/// Per-slot min/mean/max over all historical days sharing month and category.
pub fn build_envelopes(historical: &[MeteoRecord], classes: &[DayClass]) -> EnvelopeSet {
    let cat: BTreeMap<_, _> = classes.iter().map(|c| (c.date, c.category)).collect();
    struct Acc {
        days: usize,
        n: Vec<usize>,
        sum: Vec<f64>,
        min: Vec<f64>,
        max: Vec<f64>,
    }
    let mut buckets: BTreeMap<(u32, SkyCategory), Acc> = BTreeMap::new();
    for (date, range) in day_ranges(historical, |m| m.timestamp) {
        let Some(&c) = cat.get(&date) else { continue };
        let acc = buckets.entry((date.month(), c)).or_insert_with(|| Acc {
            days: 0,
            n: vec![0; SLOTS_PER_DAY],
            sum: vec![0.0; SLOTS_PER_DAY],
            min: vec![f64::INFINITY; SLOTS_PER_DAY],
            max: vec![f64::NEG_INFINITY; SLOTS_PER_DAY],
        });
        acc.days += 1;
        for m in &historical[range] {
            let s = slot_of(&m.timestamp);
            acc.n[s] += 1;
            acc.sum[s] += m.g_poa;
            acc.min[s] = acc.min[s].min(m.g_poa);
            acc.max[s] = acc.max[s].max(m.g_poa);
        }
    }
    let envelopes = buckets
        .into_iter()
        .map(|((month, category), a)| {
            let seen = |s: usize| a.n[s] > 0;
            DailyEnvelope {
                month,
                category,
                days: a.days,
                min: (0..SLOTS_PER_DAY)
                    .map(|s| if seen(s) { a.min[s] } else { 0.0 })
                    .collect(),
                mean: (0..SLOTS_PER_DAY)
                    .map(|s| if seen(s) { a.sum[s] / a.n[s] as f64 } else { 0.0 })
                    .collect(),
                max: (0..SLOTS_PER_DAY)
                    .map(|s| if seen(s) { a.max[s] } else { 0.0 })
                    .collect(),
            }
        })
        .collect();
    EnvelopeSet { envelopes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::slot_time;
    use chrono::NaiveDate;

    fn day(date: NaiveDate, noon: f64) -> Vec<MeteoRecord> {
        (0..SLOTS_PER_DAY)
            .map(|s| MeteoRecord {
                timestamp: slot_time(date, s),
                ghi: 0.0,
                g_poa: if s == 144 { noon } else { 0.0 },
                t_amb: 15.0,
                t_cell: 15.0,
            })
            .collect()
    }

    fn class(date: NaiveDate, category: SkyCategory) -> DayClass {
        DayClass {
            date,
            k: category.k_mid(),
            category,
        }
    }

    #[test]
    fn singleton_and_pair_buckets() {
        let d1 = NaiveDate::from_ymd_opt(2021, 1, 4).unwrap();
        let d2 = NaiveDate::from_ymd_opt(2021, 1, 5).unwrap();
        let d3 = NaiveDate::from_ymd_opt(2021, 1, 6).unwrap();
        let mut h = day(d1, 100.0);
        h.extend(day(d2, 300.0));
        h.extend(day(d3, 700.0));
        let classes = [
            class(d1, SkyCategory::Sc3),
            class(d2, SkyCategory::Sc3),
            class(d3, SkyCategory::Sc5),
        ];
        let set = build_envelopes(&h, &classes);
        let e = set.get(1, SkyCategory::Sc3).unwrap();
        assert_eq!((e.min[144], e.mean[144], e.max[144]), (100.0, 200.0, 300.0));
        assert_eq!(e.days, 2);
        let e = set.get(1, SkyCategory::Sc5).unwrap();
        assert_eq!((e.min[144], e.mean[144], e.max[144]), (700.0, 700.0, 700.0));
        assert!(set.get(1, SkyCategory::Sc1).is_none());

        // SC4 midpoint 0.635 is nearer SC3 (0.5) than SC5 (0.835)
        let (fb, used) = set.resolve(1, SkyCategory::Sc4).unwrap();
        assert!(used);
        assert_eq!(fb.category, SkyCategory::Sc3);
        let (fb, _) = set.resolve(1, SkyCategory::Sc1).unwrap();
        assert_eq!(fb.category, SkyCategory::Sc3);
        assert!(set.resolve(2, SkyCategory::Sc1).is_none());
    }
}
