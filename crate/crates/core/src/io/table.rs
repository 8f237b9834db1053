//! Artifact files: CSV tables of serde records and pretty JSON documents.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;

use crate::detect::ThresholdBand;
use crate::error::{Error, Result};

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Bands as `key,slot,category,lower,upper,n`; blank slot or category means
/// the band covers all of them.
pub fn write_bands(path: impl AsRef<Path>, band: &ThresholdBand) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["key", "slot", "category", "lower", "upper", "n"])?;
    for (k, b) in &band.bands {
        w.write_record([
            k.to_string(),
            k.slot.map(|s| s.to_string()).unwrap_or_default(),
            k.category.map(|c| c.label().to_string()).unwrap_or_default(),
            b.lower.to_string(),
            b.upper.to_string(),
            b.n.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{compute_thresholds, Grouping, Observation, Strategy};
    use crate::faults::SynthRow;
    use crate::simulate::ProductionSample;
    use crate::synth::SkyCategory;

    #[test]
    fn rows_round_trip_bit_exact() {
        let t = chrono::NaiveDate::from_ymd_opt(2021, 3, 1)
            .unwrap()
            .and_hms_opt(12, 5, 0)
            .unwrap();
        let mut s = ProductionSample::dark(t, 14.1, 14.1);
        s.g_poa = 812.337_000_000_1;
        s.p_dc = 1.0 / 3.0;
        s.v_dc = 601.25;
        let rows = vec![SynthRow::new(&s, SkyCategory::Sc4, 0.612_345, 51.7, 1)];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        write_csv(&p, &rows).unwrap();
        let back: Vec<SynthRow> = read_csv(&p).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn bands_csv_has_one_line_per_key() {
        let obs: Vec<Observation> = (0..40)
            .map(|i| Observation {
                slot: 100 + i % 2,
                category: SkyCategory::Sc3,
                value: i as f64,
            })
            .collect();
        let band = compute_thresholds(&obs, Strategy::MinMax, Grouping::Slot).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        write_bands(&p, &band).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1 + band.bands.len());
        assert!(text.starts_with("key,slot,category,lower,upper,n\n"));
    }
}
