use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::bands::{Observation, ThresholdBand};
use crate::error::{Error, Result};
use crate::faults::{LabelSeries, SynthRow};
use crate::nn::TargetSignal;
use crate::series::slot_of;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: Vec<u8>,
    /// Samples whose finer band was missing and were judged on the global band.
    pub global_fallbacks: usize,
}

/// Label 1 when the value lies strictly outside its band.
pub fn classify(values: &[Observation], band: &ThresholdBand) -> Classification {
    let mut fallbacks = 0;
    let labels = values
        .iter()
        .map(|o| {
            let (b, fb) = band.resolve(o);
            fallbacks += fb as usize;
            (!b.contains(o.value)) as u8
        })
        .collect();
    Classification {
        labels,
        global_fallbacks: fallbacks,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `(TP + TN)/(TP + TN + FP + FN)`.
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `TP/(TP + FN)`; `None` without positives.
    pub fn recall(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    pub fn precision(&self) -> Option<f64> {
        let p = self.tp + self.fp;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::input(format!(
            "prediction has {} labels, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn score(pred: &[u8], truth: &[u8]) -> Result<Score> {
    if pred.is_empty() {
        return Err(Error::input("nothing to score"));
    }
    let cm = confusion(pred, truth)?;
    Ok(Score {
        confusion: cm,
        accuracy: cm.accuracy(),
    })
}

/// Element-wise OR of equally long label vectors.
pub fn fuse_or(sets: &[&[u8]]) -> Result<Vec<u8>> {
    let Some(first) = sets.first() else {
        return Ok(Vec::new());
    };
    if sets.iter().any(|s| s.len() != first.len()) {
        return Err(Error::input("label series of unequal length"));
    }
    Ok((0..first.len()).map(|i| sets.iter().any(|s| s[i] != 0) as u8).collect())
}

/// Observations of one target signal over dataset rows.
pub fn observations(rows: &[SynthRow], signal: TargetSignal) -> Vec<Observation> {
    rows.iter()
        .map(|r| Observation {
            slot: slot_of(&r.timestamp),
            category: r.category,
            value: signal.value(r),
        })
        .collect()
}

/// Replaces observation values, e.g. with network predictions.
pub fn with_values(obs: &[Observation], values: &[f64]) -> Result<Vec<Observation>> {
    if obs.len() != values.len() {
        return Err(Error::input("value count differs from observation count"));
    }
    Ok(obs
        .iter()
        .zip(values)
        .map(|(o, &v)| Observation { value: v, ..*o })
        .collect())
}

/// Timestamps labelled 1.
pub fn events(timestamps: &[NaiveDateTime], labels: &[u8]) -> Vec<NaiveDateTime> {
    timestamps
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l != 0)
        .map(|(t, _)| *t)
        .collect()
}

pub fn label_series(timestamps: &[NaiveDateTime], labels: Vec<u8>) -> LabelSeries {
    LabelSeries {
        timestamps: timestamps.to_vec(),
        labels,
    }
}
