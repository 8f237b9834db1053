//! Scoring detection against labelled synthetic data, one signal at a time and
//! fused with OR.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use super::bands::{compute_thresholds, Grouping, Observation, Strategy, ThresholdBand};
use super::classify::{classify, confusion, events, fuse_or, observations, with_values, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::faults::{FaultEvent, SynthRow};
use crate::nn::{features, TargetSignal, TrainedModel};

/// Fault magnitude, percent, from which an injected fault counts as major.
pub const MAJOR_MAGNITUDE: f64 = 50.0;

/// What the bands are built on and applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The signal values themselves.
    Target,
    /// Network estimates of the signal from the row's features.
    Prediction,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Target => "target",
            Mode::Prediction => "prediction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalReport {
    pub signal: String,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub global_fallbacks: usize,
    pub events: Vec<NaiveDateTime>,
}

impl SignalReport {
    fn new(signal: &str, timestamps: &[NaiveDateTime], pred: &[u8], truth: &[u8], fallbacks: usize) -> Result<Self> {
        let cm = confusion(pred, truth)?;
        Ok(SignalReport {
            signal: signal.to_string(),
            confusion: cm,
            accuracy: cm.accuracy(),
            recall: cm.recall(),
            precision: cm.precision(),
            global_fallbacks: fallbacks,
            events: events(timestamps, pred),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: Mode,
    pub strategy: Strategy,
    pub grouping: Grouping,
    pub signals: Vec<SignalReport>,
    /// OR over all signals.
    pub fused: SignalReport,
    /// Test points carrying a fault of at least [`MAJOR_MAGNITUDE`].
    pub n_major: usize,
    /// Share of those flagged by the fused detector.
    pub major_recall: Option<f64>,
    #[serde(skip)]
    pub labels: Vec<u8>,
    #[serde(skip)]
    pub bands: Vec<(TargetSignal, ThresholdBand)>,
}

/// Labelled rows to score, with the largest injected magnitude per row.
#[derive(Debug, Clone, Copy)]
pub struct TestSet<'a> {
    pub rows: &'a [SynthRow],
    pub max_magnitude: &'a [f64],
}

/// Largest injected magnitude at each timestamp; 0 where nothing was injected.
pub fn max_magnitudes(timestamps: &[NaiveDateTime], events: &[FaultEvent]) -> Vec<f64> {
    let mut by_ts: BTreeMap<NaiveDateTime, f64> = BTreeMap::new();
    for e in events {
        let m = e.magnitudes.iter().copied().fold(0.0, f64::max);
        let slot = by_ts.entry(e.timestamp).or_insert(0.0);
        *slot = slot.max(m);
    }
    timestamps
        .iter()
        .map(|t| by_ts.get(t).copied().unwrap_or(0.0))
        .collect()
}

fn evaluate(
    mode: Mode,
    per_signal: Vec<(TargetSignal, Vec<Observation>, Vec<Observation>)>,
    test: TestSet<'_>,
    strategy: Strategy,
    grouping: Grouping,
) -> Result<ModeReport> {
    if test.rows.len() != test.max_magnitude.len() {
        return Err(Error::input("magnitude count differs from test row count"));
    }
    if per_signal.is_empty() {
        return Err(Error::input("no signals to detect on"));
    }
    let ts: Vec<NaiveDateTime> = test.rows.iter().map(|r| r.timestamp).collect();
    let truth: Vec<u8> = test.rows.iter().map(|r| r.label).collect();
    let mut signals = Vec::new();
    let mut labels = Vec::new();
    let mut bands = Vec::new();
    let mut fallbacks = 0;
    for (sig, hist, obs) in per_signal {
        let band = compute_thresholds(&hist, strategy, grouping)?;
        let c = classify(&obs, &band);
        signals.push(SignalReport::new(
            sig.name(),
            &ts,
            &c.labels,
            &truth,
            c.global_fallbacks,
        )?);
        fallbacks += c.global_fallbacks;
        labels.push(c.labels);
        bands.push((sig, band));
    }
    let refs: Vec<&[u8]> = labels.iter().map(|l| l.as_slice()).collect();
    let fused_labels = fuse_or(&refs)?;
    let fused = SignalReport::new("fused", &ts, &fused_labels, &truth, fallbacks)?;
    let major: Vec<usize> = (0..ts.len())
        .filter(|&i| test.max_magnitude[i] >= MAJOR_MAGNITUDE)
        .collect();
    let hit = major.iter().filter(|&&i| fused_labels[i] != 0).count();
    Ok(ModeReport {
        mode,
        strategy,
        grouping,
        signals,
        fused,
        n_major: major.len(),
        major_recall: (!major.is_empty()).then(|| hit as f64 / major.len() as f64),
        labels: fused_labels,
        bands,
    })
}

/// Bands from fault-free `history` values, applied to the test values.
pub fn detect_on_targets(
    history: &[SynthRow],
    test: TestSet<'_>,
    signals: &[TargetSignal],
    strategy: Strategy,
    grouping: Grouping,
) -> Result<ModeReport> {
    let per = signals
        .iter()
        .map(|&s| (s, observations(history, s), observations(test.rows, s)))
        .collect();
    evaluate(Mode::Target, per, test, strategy, grouping)
}

fn predicted(rows: &[SynthRow], signal: TargetSignal, model: &TrainedModel) -> Result<Vec<Observation>> {
    let values = rows
        .iter()
        .map(|r| model.predict(&features(r)))
        .collect::<Result<Vec<_>>>()?;
    with_values(&observations(rows, signal), &values)
}

/// Bands from network estimates over fault-free `history`, applied to the
/// estimates on the test rows.
pub fn detect_on_predictions(
    history: &[SynthRow],
    test: TestSet<'_>,
    models: &[(TargetSignal, &TrainedModel)],
    strategy: Strategy,
    grouping: Grouping,
) -> Result<ModeReport> {
    let per = models
        .iter()
        .map(|&(s, m)| Ok((s, predicted(history, s, m)?, predicted(test.rows, s, m)?)))
        .collect::<Result<Vec<_>>>()?;
    evaluate(Mode::Prediction, per, test, strategy, grouping)
}
