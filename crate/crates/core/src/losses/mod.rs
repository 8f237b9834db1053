//! Loss quantification.
//!
//! Soiling is extracted from the daily performance metric (temperature-corrected
//! energy per unit insolation): a rolling median exposes cleaning jumps, Theil-Sen
//! fits each soiling interval and a Monte Carlo over the slope confidence intervals
//! yields the insolation-weighted soiling ratio. Degradation is a linear annual
//! rate; wiring losses are ohmic; inverter losses compare DC and AC power.

mod degradation;
mod performance;
mod profile;
mod soiling;
mod theil_sen;
mod wiring;

pub use degradation::degradation_profile;
pub use performance::{daily_performance, temperature_correct, DailyPerformance, PerformanceSeries};
pub use profile::{compute_loss_profile, inverter_loss, total_loss, DailyLoss, LossInputs, LossProfile, LossReport};
pub use soiling::{
    analyze_soiling, detect_cleaning_events, monte_carlo_soiling, rolling_median, segment_intervals,
    soiling_ratio_weighted, JumpEvents, SoilingConfig, SoilingInterval, SoilingResult,
};
pub use theil_sen::{theil_sen, TheilSen};
pub use wiring::{ohmic_loss, WiringSpec, RHO_COPPER};
