//! Staged batch pipeline over a [`RunConfig`].
//!
//! ```text
//! simulate → losses ─┐
//!     └──→ synth ────┴→ inject → train → detect → report
//! ```
//!
//! Each stage reads its upstream artifacts from the output directory, writes its
//! own under `<out>/<stage>/` and finishes with `<stage>/manifest.json` listing
//! SHA-256 hashes of every input and output plus the seeds used. Reruns with the
//! same configuration produce byte-identical files.

mod stages;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{write_json, RunConfig};

pub use stages::{EventRow, WeatherRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Simulate,
    Losses,
    Synth,
    Inject,
    Train,
    Detect,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Simulate,
        Stage::Losses,
        Stage::Synth,
        Stage::Inject,
        Stage::Train,
        Stage::Detect,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Losses => "losses",
            Stage::Synth => "synth",
            Stage::Inject => "inject",
            Stage::Train => "train",
            Stage::Detect => "detect",
            Stage::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::config(format!("unknown stage `{s}`")))
    }

    /// Stages whose artifacts this one reads.
    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Simulate => &[],
            Stage::Losses | Stage::Synth => &[Stage::Simulate],
            Stage::Inject => &[Stage::Synth, Stage::Losses],
            Stage::Train => &[Stage::Inject],
            Stage::Detect => &[Stage::Inject, Stage::Train],
            Stage::Report => &[Stage::Simulate, Stage::Losses, Stage::Train, Stage::Detect],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    /// Relative to the output directory when inside it.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: Stage,
    pub version: String,
    pub config_sha256: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Tracks the files a stage touches.
#[derive(Debug)]
pub(crate) struct Ledger<'a> {
    out: &'a Path,
    stage: Stage,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seeds: BTreeMap<String, u64>,
}

impl<'a> Ledger<'a> {
    fn new(out: &'a Path, stage: Stage) -> Result<Self> {
        let dir = out.join(stage.name());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Ledger {
            out,
            stage,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seeds: BTreeMap::new(),
        })
    }

    /// Path of an upstream artifact, failing with the stage that makes it.
    pub(crate) fn input(&mut self, stage: Stage, file: &str) -> Result<PathBuf> {
        let p = self.out.join(stage.name()).join(file);
        if !p.is_file() {
            return Err(Error::MissingArtifact {
                stage: stage.name().into(),
                path: p.display().to_string(),
            });
        }
        self.inputs.push(p.clone());
        Ok(p)
    }

    pub(crate) fn external(&mut self, path: &Path) -> Result<PathBuf> {
        if !path.is_file() {
            return Err(Error::input(format!("input file {} not found", path.display())));
        }
        self.inputs.push(path.to_path_buf());
        Ok(path.to_path_buf())
    }

    pub(crate) fn output(&mut self, file: &str) -> PathBuf {
        let p = self.out.join(self.stage.name()).join(file);
        self.outputs.push(p.clone());
        p
    }

    pub(crate) fn seed(&mut self, name: &str, seed: u64) -> u64 {
        self.seeds.insert(name.into(), seed);
        seed
    }

    fn rel(&self, p: &Path) -> String {
        p.strip_prefix(self.out)
            .unwrap_or(p)
            .to_string_lossy()
            .replace('\\', "/")
    }

    fn finish(self, config_sha256: String) -> Result<Manifest> {
        let hash = |ps: &[PathBuf]| -> Result<Vec<FileHash>> {
            let mut v = ps
                .iter()
                .map(|p| {
                    Ok(FileHash {
                        path: self.rel(p),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            v.sort_by(|a, b| a.path.cmp(&b.path));
            v.dedup();
            Ok(v)
        };
        let m = Manifest {
            stage: self.stage,
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256,
            seeds: self.seeds.clone(),
            inputs: hash(&self.inputs)?,
            outputs: hash(&self.outputs)?,
        };
        write_json(self.out.join(self.stage.name()).join("manifest.json"), &m)?;
        Ok(m)
    }
}

/// A configured run rooted at an output directory.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: RunConfig,
    out: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: RunConfig, out: impl Into<PathBuf>) -> Result<Self> {
        cfg.validate()?;
        let out = out.into();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Pipeline { cfg, out })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    fn config_sha256(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&self.cfg)?)))
    }

    /// Runs one stage; its upstream artifacts must already exist.
    pub fn run(&self, stage: Stage) -> Result<Manifest> {
        for up in stage.upstream() {
            let m = self.out.join(up.name()).join("manifest.json");
            if !m.is_file() {
                return Err(Error::MissingArtifact {
                    stage: up.name().into(),
                    path: m.display().to_string(),
                });
            }
        }
        let mut ledger = Ledger::new(&self.out, stage)?;
        match stage {
            Stage::Simulate => stages::simulate(&self.cfg, &mut ledger)?,
            Stage::Losses => stages::losses(&self.cfg, &mut ledger)?,
            Stage::Synth => stages::synth(&self.cfg, &mut ledger)?,
            Stage::Inject => stages::inject(&self.cfg, &mut ledger)?,
            Stage::Train => stages::train(&self.cfg, &mut ledger)?,
            Stage::Detect => stages::detect(&self.cfg, &mut ledger)?,
            Stage::Report => stages::report(&self.cfg, &mut ledger)?,
        }
        ledger.finish(self.config_sha256()?)
    }

    /// Runs every stage in order up to and including `last`.
    pub fn run_through(&self, last: Stage) -> Result<Vec<Manifest>> {
        Stage::ALL
            .into_iter()
            .take_while(|s| *s <= last)
            .map(|s| self.run(s))
            .collect()
    }

    pub fn run_all(&self) -> Result<Vec<Manifest>> {
        self.run_through(Stage::Report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_without_detect_names_detect() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(RunConfig::reference(), dir.path()).unwrap();
        for s in [Stage::Simulate, Stage::Losses, Stage::Train] {
            std::fs::create_dir_all(dir.path().join(s.name())).unwrap();
            std::fs::write(dir.path().join(s.name()).join("manifest.json"), "{}").unwrap();
        }
        let err = p.run(Stage::Report).unwrap_err();
        match &err {
            Error::MissingArtifact { stage, .. } => assert_eq!(stage, "detect"),
            e => panic!("unexpected {e}"),
        }
        assert!(err.to_string().contains("`detect`"));
    }

    #[test]
    fn stage_order_respects_dependencies() {
        for s in Stage::ALL {
            assert!(s.upstream().iter().all(|u| *u < s));
            assert_eq!(Stage::parse(s.name()).unwrap(), s);
        }
    }
}
