use chrono::{Datelike, NaiveDate};
use rand::Rng as _;
use rayon::prelude::*;
use std::collections::BTreeMap;

use super::envelope::EnvelopeSet;
use super::irradiance::{synth_irradiance, SynthDay};
use super::sky::{DayClass, SkyCategory};
use super::temperature::{synth_temperature, TemperaturePools};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream, Rng};

/// Relative frequency of each sky category per calendar month.
pub fn month_category_weights(classes: &[DayClass]) -> BTreeMap<u32, [f64; 5]> {
    let mut out: BTreeMap<u32, [f64; 5]> = BTreeMap::new();
    for c in classes {
        out.entry(c.date.month()).or_insert([0.0; 5])[c.category.index()] += 1.0;
    }
    for w in out.values_mut() {
        let n: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= n);
    }
    out
}

/// Category drawn with the month's weights, or uniformly over `available` when
/// the month has none.
pub fn draw_category(weights: Option<&[f64; 5]>, available: &[SkyCategory], rng: &mut Rng) -> Option<SkyCategory> {
    let table: Vec<(SkyCategory, f64)> = match weights {
        Some(w) if w.iter().sum::<f64>() > 0.0 => SkyCategory::ALL.iter().map(|&c| (c, w[c.index()])).collect(),
        _ => available.iter().map(|&c| (c, 1.0)).collect(),
    };
    let total: f64 = table.iter().map(|x| x.1).sum();
    if total <= 0.0 {
        return None;
    }
    let u = rng.random_range(0.0..total);
    let mut acc = 0.0;
    for &(c, w) in &table {
        acc += w;
        if u < acc && w > 0.0 {
            return Some(c);
        }
    }
    table.iter().rev().find(|x| x.1 > 0.0).map(|x| x.0)
}

/// Consecutive synthetic days from `start`, each with a category drawn from its
/// month's historical frequencies, irradiance from the matching envelope and
/// temperatures from the historical pools.
pub fn synthesize_days(
    envelopes: &EnvelopeSet,
    pools: &TemperaturePools,
    weights: &BTreeMap<u32, [f64; 5]>,
    start: NaiveDate,
    n_days: usize,
    seed: u64,
) -> Result<Vec<SynthDay>> {
    let dates: Vec<NaiveDate> = start.iter_days().take(n_days).collect();
    dates
        .par_iter()
        .enumerate()
        .map(|(i, &date)| {
            let month = date.month();
            let mut rng = substream(seed, "calendar-category", i as u64);
            let want = draw_category(weights.get(&month), &envelopes.categories(month), &mut rng)
                .ok_or_else(|| Error::input(format!("no sky categories for month {month:02}")))?;
            let (env, _) = envelopes
                .resolve(month, want)
                .ok_or_else(|| Error::input(format!("no irradiance envelope for month {month:02}")))?;
            let mut day = synth_irradiance(env, date.year(), 1, derive_seed(seed, "calendar-irradiance", i as u64))
                .pop()
                .expect("one day");
            day.date = date;
            let t = synth_temperature(&day, pools, seed);
            day.t_amb = t.t_amb;
            day.t_cell = t.t_cell;
            Ok(day)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn weights_normalised_per_month() {
        let d = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        let classes = vec![
            DayClass {
                date: d,
                k: 0.1,
                category: SkyCategory::Sc1,
            },
            DayClass {
                date: d.succ_opt().unwrap(),
                k: 0.5,
                category: SkyCategory::Sc3,
            },
            DayClass {
                date: d + chrono::Duration::days(2),
                k: 0.5,
                category: SkyCategory::Sc3,
            },
        ];
        let w = month_category_weights(&classes);
        assert_eq!(w[&3], [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0, 0.0]);
    }

    #[test]
    fn draws_follow_weights() {
        let w = [0.0, 0.25, 0.75, 0.0, 0.0];
        let mut rng = seeded(3);
        let mut n = [0usize; 5];
        for _ in 0..20_000 {
            n[draw_category(Some(&w), &[], &mut rng).unwrap().index()] += 1;
        }
        assert_eq!((n[0], n[3], n[4]), (0, 0, 0));
        assert!((n[2] as f64 / 20_000.0 - 0.75).abs() < 0.02);
        let only = draw_category(None, &[SkyCategory::Sc4], &mut rng);
        assert_eq!(only, Some(SkyCategory::Sc4));
        assert_eq!(draw_category(None, &[], &mut rng), None);
    }
}
