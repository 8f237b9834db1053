//! Every pipeline stage on the bundled reference configuration.
//!
//! cargo run --release --example full_pipeline -- /tmp/pvtwin-out

use pvtwin::io::RunConfig;
use pvtwin::pipeline::Pipeline;

fn main() -> pvtwin::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let pipeline = Pipeline::new(RunConfig::reference(), &out)?;
    for m in pipeline.run_all()? {
        println!("{:9} {} files", m.stage.to_string(), m.outputs.len());
    }
    let summary = std::fs::read_to_string(pipeline.out_dir().join("report/summary.md"))
        .map_err(|e| pvtwin::Error::io("summary.md", e))?;
    println!("\n{summary}");
    Ok(())
}
