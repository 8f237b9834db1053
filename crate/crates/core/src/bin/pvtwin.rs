use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use pvtwin::io::RunConfig;
use pvtwin::pipeline::{Pipeline, Stage};

/// Staged PV digital-twin pipeline: simulation, losses, synthetic faults,
/// neural estimators and threshold detection.
#[derive(Debug, Parser)]
#[command(name = "pvtwin", version)]
struct Cli {
    /// Run configuration (TOML); the bundled reference plant when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; replaces every per-stage seed of the configuration.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory for stage artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest monitoring data and simulate production.
    Simulate,
    /// Daily loss profile: soiling, degradation, wiring and inverter.
    Losses,
    /// Synthetic irradiance and temperature days.
    Synth,
    /// Synthetic production with sampled losses and injected faults.
    Inject,
    /// Train the signal estimators.
    Train,
    /// Threshold bands and detection scores.
    Detect,
    /// Summary of all stages.
    Report,
    /// Every stage in order.
    All,
    /// Print the bundled reference configuration.
    Config,
}

fn run(cli: Cli) -> pvtwin::Result<serde_json::Value> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::reference(),
    };
    if let Some(s) = cli.seed {
        cfg = cfg.with_master_seed(s);
    }
    let stage = match cli.command {
        Command::Config => {
            print!("{}", pvtwin::io::REFERENCE_CONFIG);
            return Ok(serde_json::Value::Null);
        }
        Command::All => None,
        Command::Simulate => Some(Stage::Simulate),
        Command::Losses => Some(Stage::Losses),
        Command::Synth => Some(Stage::Synth),
        Command::Inject => Some(Stage::Inject),
        Command::Train => Some(Stage::Train),
        Command::Detect => Some(Stage::Detect),
        Command::Report => Some(Stage::Report),
    };
    let p = Pipeline::new(cfg, &cli.out)?;
    let manifests = match stage {
        Some(s) => vec![p.run(s)?],
        None => p.run_all()?,
    };
    Ok(serde_json::json!({
        "status": "ok",
        "out": cli.out,
        "stages": manifests.iter().map(|m| serde_json::json!({
            "stage": m.stage,
            "outputs": m.outputs.iter().map(|o| &o.path).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(serde_json::Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut err = serde_json::json!({
                "status": "error",
                "kind": e.kind(),
                "message": e.to_string(),
            });
            if let pvtwin::Error::MissingArtifact { stage, .. } = &e {
                err["run_first"] = serde_json::json!(stage);
            }
            eprintln!("{err}");
            ExitCode::from(match e {
                pvtwin::Error::Config(_) | pvtwin::Error::Toml(_) => 2,
                pvtwin::Error::MissingArtifact { .. } => 3,
                _ => 1,
            })
        }
    }
}
