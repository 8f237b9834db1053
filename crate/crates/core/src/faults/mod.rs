//! Stochastic fault injection and labelled synthetic datasets.
//!
//! Faults act multiplicatively on the production signals they target. Per day,
//! each fault hits a uniformly drawn share of the daylight samples with a
//! uniformly drawn magnitude inside its range. Historical loss factors are
//! sampled per month and applied before the faults.

mod dataset;
mod sampling;
mod schedule;
mod spec;

pub use dataset::{build_dataset, DatasetInputs, SynthRow, SyntheticDataset};
pub use sampling::{archive_month_for, sample_daily_losses};
pub use schedule::{
    apply_faults, generate_fault_schedule, labels_from_schedules, magnitude_columns, FaultEvent, FaultSchedule,
    FaultedSeries, LabelSeries, MAX_FAULT_FRACTION,
};
pub use spec::{Effect, FaultSpec, FaultTarget, Signal};
