//! Files in and out: monitoring CSV ingestion, the TOML run configuration and
//! artifact tables.

mod config;
mod ingest;
mod table;

pub use config::{
    CorpusConfig, DetectConfig, InjectConfig, LossConfig, RunConfig, Seeds, StageToggles, SynthConfig, SystemConfig,
    TrainConfig, WiringConfig, REFERENCE_CONFIG,
};
pub use ingest::{
    daily_energy, ingest, ingest_reader, parse_timestamp, write_monitoring, DailyEnergy, IngestReport, Ingested,
    RowIssue, ENERGY_TOLERANCE, IRRADIANCE_FLOOR, MAX_MALFORMED_FRACTION, OPTIONAL_COLUMNS, REQUIRED_COLUMNS,
};
pub use table::{read_csv, read_json, write_bands, write_csv, write_json};
