use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted, sorted_copy, std_dev};
use crate::synth::SkyCategory;

/// Groups smaller than this merge into the next coarser key.
pub const MIN_GROUP_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// `[μ − 3σ, μ + 3σ]`
    Mean3Sigma,
    /// `[Q1 − 1.5·IQR, Q3 + 1.5·IQR]`
    QuartileIqr,
    /// `[Q3 − 1.5·IQR, Q3 + 1.5·IQR]`, kept for comparison with the literal fence.
    QuartileIqrQ3,
    /// `[min, max]` of the history.
    MinMax,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Mean3Sigma,
        Strategy::QuartileIqr,
        Strategy::QuartileIqrQ3,
        Strategy::MinMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Mean3Sigma => "mean3sigma",
            Strategy::QuartileIqr => "quartile_iqr",
            Strategy::QuartileIqrQ3 => "quartile_iqr_q3",
            Strategy::MinMax => "minmax",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown threshold strategy `{s}`")))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grouping {
    /// Slot of day × sky category, merging to slot, then global.
    SlotCategory,
    /// Slot of day, merging to global.
    Slot,
    Global,
}

/// A value with the context used to pick its band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub slot: usize,
    pub category: SkyCategory,
    pub value: f64,
}

/// `None` fields are wildcards; the all-`None` key is the global band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BandKey {
    pub slot: Option<usize>,
    pub category: Option<SkyCategory>,
}

impl BandKey {
    pub const GLOBAL: BandKey = BandKey {
        slot: None,
        category: None,
    };
}

impl fmt::Display for BandKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.slot, self.category) {
            (None, None) => f.write_str("global"),
            (Some(s), None) => write!(f, "slot{s:03}"),
            (Some(s), Some(c)) => write!(f, "slot{s:03}-{c}"),
            (None, Some(c)) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

impl Band {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// Normal-operation bands of one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBand {
    pub strategy: Strategy,
    pub grouping: Grouping,
    /// Sorted by key.
    pub bands: Vec<(BandKey, Band)>,
}

impl ThresholdBand {
    pub fn get(&self, key: &BandKey) -> Option<&Band> {
        self.bands
            .binary_search_by(|(k, _)| k.cmp(key))
            .ok()
            .map(|i| &self.bands[i].1)
    }

    /// Most specific band for `o`; the flag is `true` when only the global band applied
    /// under a finer grouping.
    pub fn resolve(&self, o: &Observation) -> (&Band, bool) {
        let keys: &[BandKey] = match self.grouping {
            Grouping::SlotCategory => &[
                BandKey {
                    slot: Some(o.slot),
                    category: Some(o.category),
                },
                BandKey {
                    slot: Some(o.slot),
                    category: None,
                },
            ],
            Grouping::Slot => &[BandKey {
                slot: Some(o.slot),
                category: None,
            }],
            Grouping::Global => &[],
        };
        for k in keys {
            if let Some(b) = self.get(k) {
                return (b, false);
            }
        }
        let g = self.get(&BandKey::GLOBAL).expect("global band always present");
        (g, self.grouping != Grouping::Global)
    }

    /// Same limits with every band widened by `margin` on both sides.
    pub fn widened(&self, margin: f64) -> Self {
        let mut out = self.clone();
        for (_, b) in &mut out.bands {
            b.lower -= margin;
            b.upper += margin;
        }
        out
    }
}

/// Band of one group of values.
pub fn band_of(values: &[f64], strategy: Strategy) -> Result<Band> {
    if values.is_empty() {
        return Err(Error::input("empty history"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value in history"));
    }
    // sorting first makes the result independent of sample order
    let s = sorted_copy(values);
    let (lo, hi, spread) = match strategy {
        Strategy::Mean3Sigma => {
            let (m, sd) = (mean(&s), std_dev(&s));
            (m - 3.0 * sd, m + 3.0 * sd, sd)
        }
        Strategy::QuartileIqr | Strategy::QuartileIqrQ3 => {
            let (q1, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75));
            let iqr = q3 - q1;
            let base = if strategy == Strategy::QuartileIqr { q1 } else { q3 };
            (base - 1.5 * iqr, q3 + 1.5 * iqr, iqr)
        }
        Strategy::MinMax => (s[0], s[s.len() - 1], s[s.len() - 1] - s[0]),
    };
    let (lo, hi) = if spread > 0.0 {
        (lo, hi)
    } else {
        let eps = 1e-6 * lo.abs().max(hi.abs()).max(1.0);
        (lo - eps, hi + eps)
    };
    Ok(Band {
        lower: lo,
        upper: hi,
        n: values.len(),
    })
}

/// Bands for every group with at least [`MIN_GROUP_SAMPLES`] values, plus the
/// global band.
pub fn compute_thresholds(history: &[Observation], strategy: Strategy, grouping: Grouping) -> Result<ThresholdBand> {
    if history.is_empty() {
        return Err(Error::input("empty history"));
    }
    let mut groups: BTreeMap<BandKey, Vec<f64>> = BTreeMap::new();
    for o in history {
        groups.entry(BandKey::GLOBAL).or_default().push(o.value);
        if grouping != Grouping::Global {
            groups
                .entry(BandKey {
                    slot: Some(o.slot),
                    category: None,
                })
                .or_default()
                .push(o.value);
        }
        if grouping == Grouping::SlotCategory {
            groups
                .entry(BandKey {
                    slot: Some(o.slot),
                    category: Some(o.category),
                })
                .or_default()
                .push(o.value);
        }
    }
    let bands = groups
        .into_iter()
        .filter(|(k, v)| *k == BandKey::GLOBAL || v.len() >= MIN_GROUP_SAMPLES)
        .map(|(k, v)| band_of(&v, strategy).map(|b| (k, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdBand {
        strategy,
        grouping,
        bands,
    })
}
