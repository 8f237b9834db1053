use chrono::NaiveDate;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use super::theil_sen::{theil_sen, TheilSen};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::{median, quartiles, sorted_copy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoilingConfig {
    /// Rolling-median window, days.
    pub window: usize,
    /// Intervals spanning fewer days are merged into their successor.
    pub min_interval_days: i64,
    pub n_iter: usize,
    /// Minimum number of analysed days.
    pub min_days: usize,
    /// Intervals with a larger share of missing days are flagged.
    pub max_missing_fraction: f64,
    /// Open a new interval at negative outlier jumps as well as at cleanings.
    /// Off by default: ordinary steep soiling declines exceed the `|Δ|` fence
    /// often enough that splitting on them biases the interval fits.
    pub split_on_breaks: bool,
}

impl Default for SoilingConfig {
    fn default() -> Self {
        SoilingConfig {
            window: 14,
            min_interval_days: 5,
            n_iter: 1000,
            min_days: 15,
            max_missing_fraction: 0.2,
            split_on_breaks: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilingInterval {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Index range into the analysed days.
    pub range: Range<usize>,
    pub slope: f64,
    pub slope_ci_low: f64,
    pub slope_ci_high: f64,
    /// Fitted value at `start`.
    pub start_value: f64,
    /// Fitted value at `end`.
    pub end_value: f64,
    /// Jump from the previous interval's final fitted value; 0 for the first.
    pub cleaning_magnitude: f64,
    /// Whether the interval opens with a detected cleaning (as opposed to a break).
    pub after_cleaning: bool,
    pub missing_fraction: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilingResult {
    pub dates: Vec<NaiveDate>,
    pub pm_filtered: Vec<f64>,
    pub events: Vec<NaiveDate>,
    pub breaks: Vec<NaiveDate>,
    pub intervals: Vec<SoilingInterval>,
    /// `n_iter × days`.
    pub mc_profiles: Vec<Vec<f64>>,
    /// Per-day median over the Monte Carlo profiles.
    pub median_profile: Vec<f64>,
    /// Median over iterations of the insolation-weighted soiling ratio.
    pub r_s_h: f64,
    /// 2.5th and 97.5th percentiles of the per-iteration ratio.
    pub r_s_h_ci: (f64, f64),
}

/// Centred moving median. An even window reaches one day further back than
/// forward; near the ends both reaches shrink to the available symmetric span.
pub fn rolling_median(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let back = window / 2;
    let fwd = (window - 1) / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let edge = i.min(n - 1 - i);
            let (l, r) = (back.min(edge), fwd.min(edge));
            median(&values[i - l..=i + r])
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpEvents {
    /// Indices of positive outlier jumps (cleanings).
    pub cleanings: Vec<usize>,
    /// Indices of negative outlier jumps (interval breaks).
    pub breaks: Vec<usize>,
}

/// Outlier day-to-day jumps of the filtered metric: `|Δ| > Q3 + 1.5·IQR` of `|Δ|`.
/// Runs of consecutive flagged days collapse onto their first day.
pub fn detect_cleaning_events(filtered: &[f64]) -> Result<JumpEvents> {
    if filtered.len() < 15 {
        return Err(Error::input(format!(
            "cleaning detection needs at least 15 days, got {}",
            filtered.len()
        )));
    }
    let deltas: Vec<f64> = filtered.windows(2).map(|w| w[1] - w[0]).collect();
    let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
    let (q1, q3) = quartiles(&abs);
    let fence = q3 + 1.5 * (q3 - q1);
    let mut ev = JumpEvents::default();
    let mut prev: Option<(usize, bool)> = None;
    for (k, d) in deltas.iter().enumerate() {
        let day = k + 1;
        if d.abs() <= fence || *d == 0.0 {
            prev = None;
            continue;
        }
        let positive = *d > 0.0;
        match prev {
            Some((_, p)) if p == positive => {}
            _ => {
                if positive {
                    ev.cleanings.push(day);
                } else {
                    ev.breaks.push(day);
                }
            }
        }
        prev = Some((day, positive));
    }
    Ok(ev)
}

/// Splits `0..dates.len()` at the detected jumps. Returns each range with a flag
/// telling whether it opens with a cleaning.
pub fn segment_intervals(
    dates: &[NaiveDate],
    events: &JumpEvents,
    min_interval_days: i64,
) -> Vec<(Range<usize>, bool)> {
    let n = dates.len();
    if n == 0 {
        return Vec::new();
    }
    let mut cuts: Vec<(usize, bool)> = events
        .cleanings
        .iter()
        .map(|&i| (i, true))
        .chain(events.breaks.iter().map(|&i| (i, false)))
        .filter(|&(i, _)| i > 0 && i < n)
        .collect();
    cuts.sort();
    cuts.dedup_by_key(|c| c.0);

    let mut segs: Vec<(Range<usize>, bool)> = Vec::new();
    let mut start = 0;
    let mut kind = false;
    for (c, k) in cuts {
        segs.push((start..c, kind));
        start = c;
        kind = k;
    }
    segs.push((start..n, kind));

    let span = |r: &Range<usize>| (dates[r.end - 1] - dates[r.start]).num_days() + 1;
    let mut merged: Vec<(Range<usize>, bool)> = Vec::new();
    let mut pending: Option<(Range<usize>, bool)> = None;
    for (r, k) in segs {
        let (r, k) = match pending.take() {
            Some((p, pk)) => (p.start..r.end, pk),
            None => (r, k),
        };
        if span(&r) < min_interval_days {
            pending = Some((r, k));
        } else {
            merged.push((r, k));
        }
    }
    if let Some((r, k)) = pending {
        match merged.last_mut() {
            Some(last) => last.0.end = r.end,
            None => merged.push((r, k)),
        }
    }
    merged
}

/// Insolation-weighted ratio `Σ H·PM / Σ H`.
pub fn soiling_ratio_weighted(pm: &[f64], insolation: &[f64]) -> Result<f64> {
    if pm.len() != insolation.len() {
        return Err(Error::input("soiling ratio: length mismatch"));
    }
    if insolation.iter().any(|h| *h < 0.0) {
        return Err(Error::input("soiling ratio: negative insolation"));
    }
    let total: f64 = insolation.iter().sum();
    if !(total > 0.0) {
        return Err(Error::input("soiling ratio: total insolation is zero"));
    }
    Ok(pm.iter().zip(insolation).map(|(p, h)| p * h).sum::<f64>() / total)
}

/// Monte Carlo soiling profiles: per iteration each interval's slope is drawn
/// uniformly from its confidence interval and the profile rebuilt from the
/// interval's fitted start value. `x` holds each analysed day's offset in days.
pub fn monte_carlo_soiling(intervals: &[SoilingInterval], x: &[f64], n_iter: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_iter)
        .into_par_iter()
        .map(|it| {
            let mut rng = substream(seed, "soiling-mc", it as u64);
            let mut profile = vec![f64::NAN; x.len()];
            for iv in intervals {
                let slope = if iv.slope_ci_high > iv.slope_ci_low {
                    rng.random_range(iv.slope_ci_low..=iv.slope_ci_high)
                } else {
                    iv.slope_ci_low
                };
                let x0 = x[iv.range.start];
                for k in iv.range.clone() {
                    profile[k] = iv.start_value + slope * (x[k] - x0);
                }
            }
            profile
        })
        .collect()
}

fn fit_interval(x: &[f64], y: &[f64]) -> TheilSen {
    theil_sen(x, y).unwrap_or_else(|_| {
        let m = median(y);
        TheilSen {
            slope: 0.0,
            intercept: m,
            ci_low: 0.0,
            ci_high: 0.0,
        }
    })
}

/// Full soiling extraction on a daily normalised performance metric.
pub fn analyze_soiling(
    dates: &[NaiveDate],
    pm_norm: &[f64],
    insolation: &[f64],
    cfg: &SoilingConfig,
    seed: u64,
) -> Result<SoilingResult> {
    let n = dates.len();
    if pm_norm.len() != n || insolation.len() != n {
        return Err(Error::input("soiling analysis: input lengths differ"));
    }
    if n < cfg.min_days.max(15) {
        return Err(Error::input(format!(
            "soiling analysis needs at least {} days, got {n}",
            cfg.min_days.max(15)
        )));
    }
    if dates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("soiling analysis: dates must be strictly increasing"));
    }
    let x: Vec<f64> = dates.iter().map(|d| (*d - dates[0]).num_days() as f64).collect();
    let pm_filtered = rolling_median(pm_norm, cfg.window);
    let jumps = detect_cleaning_events(&pm_filtered)?;
    let cuts = if cfg.split_on_breaks {
        jumps.clone()
    } else {
        JumpEvents {
            cleanings: jumps.cleanings.clone(),
            breaks: Vec::new(),
        }
    };
    let segments = segment_intervals(dates, &cuts, cfg.min_interval_days);

    let mut intervals: Vec<SoilingInterval> = Vec::with_capacity(segments.len());
    for (range, after_cleaning) in segments {
        let fit = fit_interval(&x[range.clone()], &pm_norm[range.clone()]);
        let (xs, xe) = (x[range.start], x[range.end - 1]);
        let span = xe - xs + 1.0;
        let start_value = fit.at(xs);
        let cleaning_magnitude = intervals.last().map_or(0.0, |p| start_value - p.end_value);
        let missing_fraction = (span - range.len() as f64) / span;
        intervals.push(SoilingInterval {
            start: dates[range.start],
            end: dates[range.end - 1],
            range,
            slope: fit.slope,
            slope_ci_low: fit.ci_low,
            slope_ci_high: fit.ci_high,
            start_value,
            end_value: fit.at(xe),
            cleaning_magnitude,
            after_cleaning,
            missing_fraction,
            flagged: missing_fraction > cfg.max_missing_fraction,
        });
    }

    let mc_profiles = monte_carlo_soiling(&intervals, &x, cfg.n_iter.max(1), seed);
    let ratios = mc_profiles
        .iter()
        .map(|p| soiling_ratio_weighted(p, insolation))
        .collect::<Result<Vec<f64>>>()?;
    let sorted = sorted_copy(&ratios);
    let median_profile = (0..n)
        .map(|k| median(&mc_profiles.iter().map(|p| p[k]).collect::<Vec<_>>()))
        .collect();

    let keep = |idx: &[usize]| idx.iter().map(|&i| dates[i]).collect::<Vec<_>>();
    Ok(SoilingResult {
        dates: dates.to_vec(),
        pm_filtered,
        events: keep(&jumps.cleanings),
        breaks: keep(&jumps.breaks),
        intervals,
        mc_profiles,
        median_profile,
        r_s_h: median(&ratios),
        r_s_h_ci: (
            crate::stats::quantile_sorted(&sorted, 0.025),
            crate::stats::quantile_sorted(&sorted, 0.975),
        ),
    })
}
