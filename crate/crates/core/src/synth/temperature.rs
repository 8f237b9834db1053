use chrono::Datelike;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::irradiance::SynthDay;
use super::sky::{DayClass, SkyCategory};
use crate::rng::{substream, Rng};
use crate::series::MeteoRecord;

/// Initial half-width of the irradiance match band, relative.
const BAND: f64 = 0.025;
const BAND_CAP: f64 = 0.20;

/// NOCT cell temperature `T_amb + (T_NOCT − 20)/800 · G`.
pub fn noct_cell_temp(t_amb: f64, g_poa: f64, t_noct: f64) -> f64 {
    t_amb + (t_noct - 20.0) / 800.0 * g_poa
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Gauss2 {
    mean: (f64, f64),
    /// Lower-triangular Cholesky factor `(l11, l21, l22)`.
    chol: (f64, f64, f64),
}

impl Gauss2 {
    fn fit(samples: &[(f64, f64, f64)]) -> Self {
        let n = samples.len() as f64;
        let ma = samples.iter().map(|s| s.1).sum::<f64>() / n;
        let mc = samples.iter().map(|s| s.2).sum::<f64>() / n;
        if samples.len() < 2 {
            return Gauss2 {
                mean: (samples[0].1, samples[0].2),
                chol: (0.0, 0.0, 0.0),
            };
        }
        let (mut saa, mut sac, mut scc) = (0.0, 0.0, 0.0);
        for s in samples {
            let (da, dc) = (s.1 - ma, s.2 - mc);
            saa += da * da;
            sac += da * dc;
            scc += dc * dc;
        }
        let d = n - 1.0;
        let (saa, sac, scc) = (saa / d, sac / d, scc / d);
        let l11 = saa.sqrt();
        let l21 = if l11 > 0.0 { sac / l11 } else { 0.0 };
        let l22 = (scc - l21 * l21).max(0.0).sqrt();
        Gauss2 {
            mean: (ma, mc),
            chol: (l11, l21, l22),
        }
    }

    fn sample(&self, rng: &mut Rng) -> (f64, f64) {
        let (l11, l21, l22) = self.chol;
        if l11 == 0.0 && l22 == 0.0 {
            return self.mean;
        }
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        (self.mean.0 + l11 * z1, self.mean.1 + l21 * z1 + l22 * z2)
    }
}

/// Historical `(G, T_amb, T_cell)` triples of one bucket, sorted by irradiance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Pool {
    samples: Vec<(f64, f64, f64)>,
}

impl Pool {
    fn matches(&self, g: f64, half_width: f64) -> &[(f64, f64, f64)] {
        let (lo, hi) = (g * (1.0 - half_width), g * (1.0 + half_width));
        let a = self.samples.partition_point(|s| s.0 < lo);
        let b = self.samples.partition_point(|s| s.0 <= hi);
        &self.samples[a..b]
    }
}

/// Temperature samples grouped by (month, sky category).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemperaturePools {
    pools: BTreeMap<String, Pool>,
    monthly_t_amb: BTreeMap<u32, f64>,
    pub t_noct: f64,
}

fn key(month: u32, c: SkyCategory) -> String {
    format!("{month:02}-{c}")
}

impl TemperaturePools {
    pub fn build(historical: &[MeteoRecord], classes: &[DayClass], t_noct: f64) -> Self {
        let cat: BTreeMap<_, _> = classes.iter().map(|c| (c.date, c.category)).collect();
        let mut pools: BTreeMap<String, Pool> = BTreeMap::new();
        let mut t_amb_acc: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for m in historical {
            let date = m.timestamp.date();
            let month = date.month();
            let e = t_amb_acc.entry(month).or_insert((0.0, 0));
            e.0 += m.t_amb;
            e.1 += 1;
            if let Some(&c) = cat.get(&date) {
                pools
                    .entry(key(month, c))
                    .or_default()
                    .samples
                    .push((m.g_poa, m.t_amb, m.t_cell));
            }
        }
        for p in pools.values_mut() {
            p.samples
                .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        }
        TemperaturePools {
            pools,
            monthly_t_amb: t_amb_acc.into_iter().map(|(m, (s, n))| (m, s / n as f64)).collect(),
            t_noct,
        }
    }

    /// Pool for the bucket or the same month's nearest category in k.
    fn pool(&self, month: u32, category: SkyCategory) -> Option<&Pool> {
        let mut cats = SkyCategory::ALL.to_vec();
        cats.sort_by(|a, b| {
            (a.k_mid() - category.k_mid())
                .abs()
                .total_cmp(&(b.k_mid() - category.k_mid()).abs())
                .then(a.cmp(b))
        });
        cats.into_iter().find_map(|c| self.pools.get(&key(month, c)))
    }

    fn monthly_mean(&self, month: u32) -> f64 {
        self.monthly_t_amb
            .get(&month)
            .copied()
            .unwrap_or_else(|| self.monthly_t_amb.values().sum::<f64>() / self.monthly_t_amb.len().max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSample {
    pub t_amb: Vec<f64>,
    pub t_cell: Vec<f64>,
    /// Slots that fell back to the NOCT model (no match within ±20%).
    pub fallback_slots: usize,
}

/// Ambient and cell temperature for every slot of a synthetic day.
///
/// Each slot draws from a bivariate Gaussian fitted to historical samples of the
/// same month and category whose irradiance lies within ±2.5% of the synthetic
/// value; the band doubles up to ±20% when empty.
pub fn synth_temperature(day: &SynthDay, pools: &TemperaturePools, seed: u64) -> TemperatureSample {
    let month = day.date.month();
    let pool = pools.pool(month, day.category);
    let mut rng = substream(seed, "synth-temperature", day.date.num_days_from_ce() as u64);
    let mut night: Option<Gauss2> = None;
    let mut out = TemperatureSample {
        t_amb: Vec::with_capacity(day.g_poa.len()),
        t_cell: Vec::with_capacity(day.g_poa.len()),
        fallback_slots: 0,
    };
    for &g in &day.g_poa {
        let mut fit = None;
        if let Some(pool) = pool {
            if g == 0.0 {
                if night.is_none() {
                    let m = pool.matches(0.0, 0.0);
                    if !m.is_empty() {
                        night = Some(Gauss2::fit(m));
                    }
                }
                fit = night;
            } else {
                let mut w = BAND;
                while w <= BAND_CAP + 1e-12 {
                    let m = pool.matches(g, w);
                    if !m.is_empty() {
                        fit = Some(Gauss2::fit(m));
                        break;
                    }
                    w *= 2.0;
                }
            }
        }
        let (ta, tc) = match fit {
            Some(f) => f.sample(&mut rng),
            None => {
                out.fallback_slots += 1;
                let ta = pools.monthly_mean(month);
                (ta, noct_cell_temp(ta, g, pools.t_noct))
            }
        };
        out.t_amb.push(ta);
        out.t_cell.push(tc);
    }
    out
}
