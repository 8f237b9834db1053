//! Ingest a monitoring CSV in the canonical schema and print the cleaning report.
//!
//! cargo run --example ingest_monitoring -- data.csv

use pvtwin::io::ingest;

fn main() -> pvtwin::Result<()> {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: ingest_monitoring FILE.csv");
        std::process::exit(2);
    };
    let out = ingest(&path)?;
    let r = &out.report;
    println!(
        "rows {}  kept {}  missing {}  duplicates {}  malformed {}",
        r.rows,
        r.records,
        r.missing,
        r.duplicates.len(),
        r.malformed.len()
    );
    println!(
        "irradiance zeroed {}  negative values clamped {}",
        r.zeroed_irradiance, r.clamped_negative
    );
    for m in r.malformed.iter().chain(&r.duplicates).take(10) {
        println!("  line {}: {}", m.line, m.reason);
    }
    for e in r.energy.iter().filter(|e| e.mismatch) {
        println!(
            "  {} logged {:.0} Wh vs {:.0} Wh from P_AC",
            e.date,
            e.logged.unwrap_or(0.0),
            e.computed
        );
    }
    Ok(())
}
