use chrono::NaiveDate;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::envelope::DailyEnvelope;
use super::sky::SkyCategory;
use crate::rng::{substream, Rng};
use crate::series::days_in_month;

/// One synthetic day at 5-minute resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDay {
    pub date: NaiveDate,
    pub category: SkyCategory,
    pub g_poa: Vec<f64>,
    /// Filled by [`super::synth_temperature`]; empty until then.
    pub t_amb: Vec<f64>,
    pub t_cell: Vec<f64>,
}

/// Gaussian centred at `mean` with `σ = (max − min)/6`, truncated to `[min, max]`.
fn truncated_draw(rng: &mut Rng, min: f64, mean: f64, max: f64) -> f64 {
    if !(max > min) {
        return mean;
    }
    let sigma = (max - min) / 6.0;
    let normal = Normal::new(mean, sigma).expect("finite positive sigma");
    for _ in 0..256 {
        let v = normal.sample(rng);
        if (min..=max).contains(&v) {
            return v;
        }
    }
    rng.random_range(min..=max)
}

/// `n_days` synthetic irradiance days drawn from `env`.
///
/// Dates run through the envelope's month starting in `year`, continuing into the
/// same month of following years when `n_days` exceeds the month length.
pub fn synth_irradiance(env: &DailyEnvelope, year: i32, n_days: usize, seed: u64) -> Vec<SynthDay> {
    let mut out = Vec::with_capacity(n_days);
    let (mut y, mut d) = (year, 1u32);
    for k in 0..n_days {
        if d > days_in_month(y, env.month) {
            y += 1;
            d = 1;
        }
        let date = NaiveDate::from_ymd_opt(y, env.month, d).expect("valid synthetic date");
        d += 1;
        let mut rng = substream(seed, "synth-irradiance", k as u64);
        let g_poa = (0..env.mean.len())
            .map(|s| truncated_draw(&mut rng, env.min[s], env.mean[s], env.max[s]))
            .collect();
        out.push(SynthDay {
            date,
            category: env.category,
            g_poa,
            t_amb: Vec::new(),
            t_cell: Vec::new(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SLOTS_PER_DAY;

    fn bell(peak: f64) -> Vec<f64> {
        (0..SLOTS_PER_DAY)
            .map(|s| {
                let h = s as f64 / 12.0;
                if (6.0..18.0).contains(&h) {
                    peak * (std::f64::consts::PI * (h - 6.0) / 12.0).sin()
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn envelope() -> DailyEnvelope {
        let mean = bell(700.0);
        DailyEnvelope {
            month: 2,
            category: SkyCategory::Sc4,
            days: 5,
            min: mean.iter().map(|m| 0.6 * m).collect(),
            max: mean.iter().map(|m| 1.3 * m).collect(),
            mean,
        }
    }

    #[test]
    fn degenerate_envelope_is_reproduced() {
        let env = DailyEnvelope::degenerate(3, SkyCategory::Sc2, bell(400.0));
        for day in synth_irradiance(&env, 2021, 3, 1) {
            assert_eq!(day.g_poa, env.mean);
        }
    }

    #[test]
    fn draws_stay_in_envelope_and_night_is_zero() {
        let env = envelope();
        let days = synth_irradiance(&env, 2021, 40, 8);
        assert_eq!(days[0].date, NaiveDate::from_ymd_opt(2021, 2, 1).unwrap());
        assert_eq!(days[28].date, NaiveDate::from_ymd_opt(2022, 2, 1).unwrap());
        for d in &days {
            for s in 0..SLOTS_PER_DAY {
                assert!(d.g_poa[s] >= env.min[s] && d.g_poa[s] <= env.max[s]);
                if env.max[s] == 0.0 {
                    assert_eq!(d.g_poa[s], 0.0);
                }
            }
        }
        assert_eq!(days, synth_irradiance(&env, 2021, 40, 8));
        assert_ne!(days, synth_irradiance(&env, 2021, 40, 9));
    }

    #[test]
    fn slot_means_track_envelope_mean() {
        let env = envelope();
        let days = synth_irradiance(&env, 2021, 1000, 3);
        for s in 0..SLOTS_PER_DAY {
            if env.mean[s] > 100.0 {
                let m = days.iter().map(|d| d.g_poa[s]).sum::<f64>() / days.len() as f64;
                assert!((m - env.mean[s]).abs() / env.mean[s] < 0.05, "slot {s}");
            }
        }
    }
}
