//! Digital twin of a grid-connected photovoltaic plant.
//!
//! The crate is organised around the life cycle of a monitoring dataset:
//!
//! - [`geometry`]: solar position and the clear-sky plane-of-array reference.
//! - [`pv`]: five-parameter single-diode module model and the Sandia inverter model.
//! - [`losses`]: soiling (Theil-Sen + Monte Carlo), degradation, wiring and inverter
//!   losses, composed into a daily [`losses::LossProfile`].
//! - [`synth`]: clearness-index categorisation and synthetic irradiance/temperature.
//! - [`faults`]: stochastic fault schedules, loss sampling and labelled datasets.
//! - [`nn`]: small feed-forward estimators of technical signals with k-fold validation.
//! - [`detect`]: statistical normal-operation bands and confusion-matrix scoring.
//! - [`io`] and [`pipeline`]: ingestion, configuration and the staged batch pipeline.
//!
//! Every stochastic routine takes an explicit `u64` seed; identical inputs and seeds
//! produce identical outputs.

pub mod detect;
pub mod error;
pub mod faults;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod nn;
pub mod pipeline;
pub mod pv;
pub mod reference;
pub mod rng;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
