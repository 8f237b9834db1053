//! Monitoring CSV ingestion.
//!
//! Canonical schema, one row per 5-minute sample, local standard time:
//!
//! | column      | unit | notes                          |
//! |-------------|------|--------------------------------|
//! | `timestamp` |      | `YYYY-MM-DDTHH:MM:SS`          |
//! | `ghi`       | W/m² |                                |
//! | `g_poa`     | W/m² |                                |
//! | `t_amb`     | °C   |                                |
//! | `t_cell`    | °C   |                                |
//! | `i_dc`      | A    |                                |
//! | `v_dc`      | V    |                                |
//! | `p_dc`      | W    |                                |
//! | `p_ac`      | W    |                                |
//! | `e_day`     | Wh   | optional, advisory             |
//!
//! Column order is free; extra columns are ignored.

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{day_ranges, MonitoringRecord, STEP_HOURS, STEP_MINUTES};

pub const REQUIRED_COLUMNS: [&str; 9] = [
    "timestamp",
    "ghi",
    "g_poa",
    "t_amb",
    "t_cell",
    "i_dc",
    "v_dc",
    "p_dc",
    "p_ac",
];
pub const OPTIONAL_COLUMNS: [&str; 1] = ["e_day"];
/// Irradiance at or below this is sensor noise and stored as zero, W/m².
pub const IRRADIANCE_FLOOR: f64 = 1.5;
/// Above this share of malformed rows the file is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;
/// Relative gap between logged and recomputed daily energy that gets flagged.
pub const ENERGY_TOLERANCE: f64 = 0.05;

const TIMESTAMP_FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowIssue {
    /// 1-based line in the file, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyEnergy {
    pub date: NaiveDate,
    /// Integral of P_AC over the day, Wh.
    pub computed: f64,
    /// Largest `e_day` value logged that day.
    pub logged: Option<f64>,
    /// Logged and computed energy differ by more than [`ENERGY_TOLERANCE`].
    pub mismatch: bool,
}

/// What ingestion did to the file. `records + missing + duplicates + malformed = rows`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    pub records: usize,
    /// Rows with an empty required field.
    pub missing: usize,
    pub duplicates: Vec<RowIssue>,
    pub malformed: Vec<RowIssue>,
    pub zeroed_irradiance: usize,
    pub clamped_negative: usize,
    pub energy: Vec<DailyEnergy>,
}

impl IngestReport {
    pub fn dropped(&self) -> usize {
        self.missing + self.duplicates.len() + self.malformed.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub records: Vec<MonitoringRecord>,
    pub report: IngestReport,
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file).map_err(|e| match e {
        Error::Input(m) => Error::input(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn is_missing(s: &str) -> bool {
    matches!(s.trim().to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null")
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

enum Row {
    Ok(MonitoringRecord),
    Missing,
    Bad(String),
}

fn parse_row(rec: &csv::StringRecord, cols: &[usize; 9], e_day: Option<usize>) -> Row {
    let field = |i: usize| rec.get(i).unwrap_or("");
    if cols.iter().any(|&i| is_missing(field(i))) {
        return Row::Missing;
    }
    let Some(ts) = parse_timestamp(field(cols[0])) else {
        return Row::Bad(format!("unparseable timestamp `{}`", field(cols[0])));
    };
    if ts.second() != 0 || ts.minute() % STEP_MINUTES != 0 {
        return Row::Bad(format!("timestamp {ts} is off the {STEP_MINUTES}-minute grid"));
    }
    let mut v = [0.0; 8];
    for (k, &i) in cols[1..].iter().enumerate() {
        match field(i).trim().parse::<f64>() {
            Ok(x) if x.is_finite() => v[k] = x,
            _ => {
                return Row::Bad(format!(
                    "column {}: `{}` is not a finite number",
                    REQUIRED_COLUMNS[k + 1],
                    field(i)
                ))
            }
        }
    }
    let e_day = match e_day.map(field) {
        None => None,
        Some(s) if is_missing(s) => None,
        Some(s) => match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => return Row::Bad(format!("column e_day: `{s}` is not a finite number")),
        },
    };
    Row::Ok(MonitoringRecord {
        timestamp: ts,
        ghi: v[0],
        g_poa: v[1],
        t_amb: v[2],
        t_cell: v[3],
        i_dc: v[4],
        v_dc: v[5],
        p_dc: v[6],
        p_ac: v[7],
        e_day,
    })
}

pub fn ingest_reader(reader: impl Read) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut cols = [0usize; 9];
    for (k, name) in REQUIRED_COLUMNS.iter().enumerate() {
        cols[k] = find(name).ok_or_else(|| Error::input(format!("missing required column `{name}`")))?;
    }
    let e_col = find(OPTIONAL_COLUMNS[0]);

    let mut rows = 0;
    let mut missing = 0;
    let mut malformed = Vec::new();
    let mut duplicates = Vec::new();
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for rec in rdr.records() {
        rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                malformed.push(RowIssue {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, &cols, e_col) {
            Row::Missing => missing += 1,
            Row::Bad(reason) => malformed.push(RowIssue { line, reason }),
            Row::Ok(r) if !seen.insert(r.timestamp) => duplicates.push(RowIssue {
                line,
                reason: format!("duplicate timestamp {}", r.timestamp),
            }),
            Row::Ok(r) => records.push(r),
        }
    }
    if rows > 0 && malformed.len() as f64 > MAX_MALFORMED_FRACTION * rows as f64 {
        let first: Vec<String> = malformed
            .iter()
            .take(5)
            .map(|m| format!("line {}: {}", m.line, m.reason))
            .collect();
        return Err(Error::input(format!(
            "{} of {rows} rows malformed (limit {:.0}%); first: {}",
            malformed.len(),
            MAX_MALFORMED_FRACTION * 100.0,
            first.join("; ")
        )));
    }

    records.sort_by_key(|r| r.timestamp);
    let mut zeroed_irradiance = 0;
    let mut clamped_negative = 0;
    for r in &mut records {
        for g in [&mut r.ghi, &mut r.g_poa] {
            if *g <= IRRADIANCE_FLOOR && *g != 0.0 {
                *g = 0.0;
                zeroed_irradiance += 1;
            }
        }
        for x in [&mut r.i_dc, &mut r.v_dc, &mut r.p_dc, &mut r.p_ac] {
            if *x < 0.0 {
                *x = 0.0;
                clamped_negative += 1;
            }
        }
    }
    let energy = daily_energy(&records);
    let report = IngestReport {
        rows,
        records: records.len(),
        missing,
        duplicates,
        malformed,
        zeroed_irradiance,
        clamped_negative,
        energy,
    };
    Ok(Ingested { records, report })
}

/// Daily AC energy from the power samples, compared with the logged counter.
pub fn daily_energy(records: &[MonitoringRecord]) -> Vec<DailyEnergy> {
    day_ranges(records, |r| r.timestamp)
        .into_iter()
        .map(|(date, range)| {
            let day = &records[range];
            let computed: f64 = day.iter().map(|r| r.p_ac * STEP_HOURS).sum();
            let logged = day.iter().filter_map(|r| r.e_day).reduce(f64::max);
            let mismatch = logged.is_some_and(|l| (l - computed).abs() > ENERGY_TOLERANCE * computed.max(l).max(1.0));
            DailyEnergy {
                date,
                computed,
                logged,
                mismatch,
            }
        })
        .collect()
}

/// Writes records in the canonical schema.
pub fn write_monitoring(path: impl AsRef<Path>, records: &[MonitoringRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    header.extend(OPTIONAL_COLUMNS);
    w.write_record(&header)?;
    for r in records {
        w.write_record(&[
            r.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
            r.ghi.to_string(),
            r.g_poa.to_string(),
            r.t_amb.to_string(),
            r.t_cell.to_string(),
            r.i_dc.to_string(),
            r.v_dc.to_string(),
            r.p_dc.to_string(),
            r.p_ac.to_string(),
            r.e_day.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::day_timestamps;

    const HEADER: &str = "timestamp,ghi,g_poa,t_amb,t_cell,i_dc,v_dc,p_dc,p_ac,e_day\n";

    fn day_csv() -> String {
        let mut s = HEADER.to_string();
        let d = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        for (i, t) in day_timestamps(d).iter().enumerate() {
            let g = if (72..216).contains(&i) { 500.0 } else { 0.0 };
            s += &format!(
                "{},{g},{g},15,25,10,600,{},{},\n",
                t.format("%Y-%m-%dT%H:%M:%S"),
                6000.0 * g / 500.0,
                5800.0 * g / 500.0
            );
        }
        s
    }

    #[test]
    fn complete_day_has_288_records() {
        let out = ingest_reader(day_csv().as_bytes()).unwrap();
        assert_eq!(out.records.len(), 288);
        assert_eq!(out.report.dropped(), 0);
        assert_eq!(out.report.energy.len(), 1);
        assert!((out.report.energy[0].computed - 5800.0 * 144.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn missing_timestamp_row_is_dropped_and_counted() {
        let s = day_csv();
        let mut lines: Vec<&str> = s.lines().collect();
        let broken = lines[100].splitn(2, ',').nth(1).unwrap().to_string();
        let broken = format!(",{broken}");
        lines[100] = &broken;
        let out = ingest_reader(lines.join("\n").as_bytes()).unwrap();
        assert_eq!(out.records.len(), 287);
        assert_eq!(out.report.missing, 1);
        assert_eq!(out.report.records + out.report.dropped(), out.report.rows);
    }

    #[test]
    fn low_irradiance_zeroed_and_negative_power_clamped() {
        let s = format!("{HEADER}2020-03-01T06:00:00,1.2,1.5,14,14,0,0,-3,-20,\n2020-03-01T06:05:00,1.6,1.51,14,14,0.1,500,50,40,3\n");
        let out = ingest_reader(s.as_bytes()).unwrap();
        assert_eq!(out.records[0].g_poa, 0.0);
        assert_eq!(out.records[0].ghi, 0.0);
        assert_eq!(out.records[0].p_ac, 0.0);
        assert_eq!(out.records[0].p_dc, 0.0);
        assert_eq!(out.records[1].g_poa, 1.51);
        assert_eq!(out.report.zeroed_irradiance, 2);
        assert_eq!(out.report.clamped_negative, 2);
        assert_eq!(out.records[1].e_day, Some(3.0));
    }

    #[test]
    fn duplicates_rejected_with_line_numbers() {
        let s = format!("{HEADER}2020-03-01T06:00:00,0,0,14,14,0,0,0,0,\n2020-03-01T06:00:00,5,5,14,14,0,0,0,0,\n");
        let out = ingest_reader(s.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].g_poa, 0.0);
        assert_eq!(out.report.duplicates[0].line, 3);
    }

    #[test]
    fn malformed_rows_reported_then_fatal_above_limit() {
        let mut s = day_csv();
        s = s.replacen("2020-03-01T00:10:00,0,0,15", "2020-03-01T00:10:00,zero,0,15", 1);
        let out = ingest_reader(s.as_bytes()).unwrap();
        assert_eq!(out.report.malformed.len(), 1);
        assert_eq!(out.report.malformed[0].line, 4);
        assert!(out.report.malformed[0].reason.contains("ghi"));

        let mut bad = HEADER.to_string();
        for i in 0..10 {
            bad += &format!("2020-03-01T00:{:02}:00,1,1,1,1,1,1,1,1,\n", i * 5);
        }
        bad += "2020-03-01T01:00:00,x,1,1,1,1,1,1,1,\n2020-03-01T01:07:00,1,1,1,1,1,1,1,1,\n";
        let err = ingest_reader(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Input(_)), "{err}");
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let s = "timestamp,ghi\n2020-03-01T00:00:00,0\n";
        assert!(ingest_reader(s.as_bytes()).is_err());
    }

    #[test]
    fn write_then_ingest_round_trips() {
        let a = ingest_reader(day_csv().as_bytes()).unwrap().records;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_monitoring(&p, &a).unwrap();
        assert_eq!(ingest(&p).unwrap().records, a);
    }

    #[test]
    fn logged_energy_mismatch_flagged() {
        let s = format!("{HEADER}2020-03-01T12:00:00,800,800,14,30,10,600,6000,6000,100\n");
        let e = &ingest_reader(s.as_bytes()).unwrap().report.energy[0];
        assert_eq!(e.computed, 500.0);
        assert!(e.mismatch);
    }

    proptest::proptest! {
        #[test]
        fn record_count_plus_drops_equals_rows(mask in proptest::collection::vec(0u8..4, 1..60)) {
            let mut s = HEADER.to_string();
            for (i, m) in mask.iter().enumerate() {
                let t = format!("2020-03-01T{:02}:{:02}:00", i / 12, (i % 12) * 5);
                match m {
                    0 => s += &format!("{t},1,1,1,1,1,1,1,1,\n"),
                    1 => s += &format!("{t},,1,1,1,1,1,1,1,\n"),
                    2 => s += "2020-03-01T00:00:00,1,1,1,1,1,1,1,1,\n",
                    _ => s += &format!("{t},1,1,1,1,1,1,1,oops,\n"),
                }
            }
            if let Ok(out) = ingest_reader(s.as_bytes()) {
                proptest::prop_assert_eq!(out.report.records + out.report.dropped(), mask.len());
                proptest::prop_assert_eq!(out.records.len(), out.report.records);
            }
        }
    }
}
