//! Climate-consistent synthetic weather.
//!
//! Historical days are categorised by their daily clearness index, per-slot
//! irradiance envelopes are built for every (month, category) bucket, and new days
//! are drawn slot by slot from truncated Gaussians inside the envelope.
//! Temperatures are drawn from historical samples whose irradiance lies within
//! ±2.5% of the synthetic value.

mod calendar;
mod envelope;
mod irradiance;
mod sky;
mod temperature;

pub use calendar::{draw_category, month_category_weights, synthesize_days};
pub use envelope::{build_envelopes, DailyEnvelope, EnvelopeSet};
pub use irradiance::{synth_irradiance, SynthDay};
pub use sky::{classify_days, classify_sky, clear_sky_day, clearness_index, daily_clearness, DayClass, SkyCategory};
pub use temperature::{noct_cell_temp, synth_temperature, TemperaturePools, TemperatureSample};
