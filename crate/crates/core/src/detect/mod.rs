//! Statistical normal-operation bands and fault classification.
//!
//! Bands are built per 5-minute slot of day and sky category from fault-free
//! history, merging into coarser groups when data is thin. A sample outside its
//! band is labelled faulty; band limits themselves count as normal.

mod bands;
mod classify;
mod evaluate;

pub use bands::{
    band_of, compute_thresholds, Band, BandKey, Grouping, Observation, Strategy, ThresholdBand, MIN_GROUP_SAMPLES,
};
pub use classify::{
    classify, confusion, events, fuse_or, label_series, observations, score, with_values, Classification,
    ConfusionMatrix, Score,
};
pub use evaluate::{
    detect_on_predictions, detect_on_targets, max_magnitudes, Mode, ModeReport, SignalReport, TestSet, MAJOR_MAGNITUDE,
};
