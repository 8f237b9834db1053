//! TOML run configuration.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::detect::{Grouping, Strategy};
use crate::error::{Error, Result};
use crate::faults::FaultSpec;
use crate::geometry::{ArrayOrientation, GeoLocation};
use crate::losses::{SoilingConfig, WiringSpec, RHO_COPPER};
use crate::nn::{NetworkConfig, TargetSignal};
use crate::pv::{ArrayConfig, InverterParams, ModuleParams};
use crate::rng::derive_seed;
use crate::simulate::SystemSpec;

/// Configuration of the plant and the two reference systems, as bundled.
pub const REFERENCE_CONFIG: &str = include_str!("../../data/reference.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiringConfig {
    pub length: f64,
    pub cross_section: f64,
    #[serde(default = "copper")]
    pub rho: f64,
}

fn copper() -> f64 {
    RHO_COPPER
}

impl From<WiringConfig> for WiringSpec {
    fn from(w: WiringConfig) -> Self {
        WiringSpec {
            rho: w.rho,
            length: w.length,
            cross_section: w.cross_section,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    /// Name of a bundled module or of a `[modules.*]` table.
    pub module: String,
    pub inverter: String,
    pub modules_per_string: u32,
    pub strings: u32,
    pub tilt: f64,
    pub azimuth: f64,
    pub dc_wiring: WiringConfig,
    pub ac_wiring: WiringConfig,
    /// Monitoring export to ingest; the generated reference corpus when absent.
    #[serde(default)]
    pub monitoring: Option<PathBuf>,
}

/// One seed per stochastic stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Stand-in monitoring corpus, used when a system has no monitoring file.
    pub corpus: u64,
    /// Monte Carlo soiling confidence intervals.
    pub losses: u64,
    pub synth: u64,
    /// Loss sampling and fault schedules.
    pub inject: u64,
    pub train: u64,
}

impl Seeds {
    /// Stage seeds derived from one master seed.
    pub fn from_master(master: u64) -> Self {
        Seeds {
            corpus: derive_seed(master, "corpus", 0),
            losses: derive_seed(master, "losses", 0),
            synth: derive_seed(master, "synth", 0),
            inject: derive_seed(master, "inject", 0),
            train: derive_seed(master, "train", 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageToggles {
    /// Run 5-fold cross validation in the train stage.
    pub cross_validate: bool,
    /// Include sampled historical losses in synthetic production.
    pub losses_in_synth: bool,
    /// Also detect on network predictions, not only on target values.
    pub detect_on_predictions: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        StageToggles {
            cross_validate: false,
            losses_in_synth: true,
            detect_on_predictions: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Percent per year.
    pub degradation_rate: f64,
    pub degradation_start: NaiveDate,
    #[serde(default)]
    pub soiling: SoilingConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub n_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectConfig {
    /// Standard fault set when absent.
    #[serde(default)]
    pub faults: Option<Vec<FaultSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub targets: Vec<String>,
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub dropout: Option<f64>,
    /// Scaled to the training set size when absent.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Neurons per hidden layer, by target name.
    #[serde(default)]
    pub hidden: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    /// Trailing synthetic days scored; the earlier days are training history.
    pub days: usize,
    pub strategy: String,
    #[serde(default = "default_grouping")]
    pub grouping: String,
    pub signals: Vec<String>,
}

fn default_grouping() -> String {
    "slot_category".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub site: GeoLocation,
    pub seeds: Seeds,
    #[serde(default)]
    pub stages: StageToggles,
    pub corpus: CorpusConfig,
    pub losses: LossConfig,
    pub synth: SynthConfig,
    #[serde(default = "default_inject")]
    pub inject: InjectConfig,
    pub train: TrainConfig,
    pub detect: DetectConfig,
    pub systems: Vec<SystemConfig>,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleParams>,
    #[serde(default)]
    pub inverters: BTreeMap<String, InverterParams>,
}

fn default_inject() -> InjectConfig {
    InjectConfig { faults: None }
}

fn bundled_module(name: &str) -> Option<ModuleParams> {
    let m = ModuleParams::lg400n2w_a5();
    (name.eq_ignore_ascii_case("LG400N2W-A5") || name == m.name).then_some(m)
}

fn bundled_inverter(name: &str) -> Option<InverterParams> {
    [InverterParams::abb_trio_50(), InverterParams::abb_trio_27_6()]
        .into_iter()
        .zip(["ABB TRIO-50.0", "ABB TRIO-27.6"])
        .find(|(p, short)| name.eq_ignore_ascii_case(short) || name == p.name)
        .map(|x| x.0)
}

impl RunConfig {
    pub fn reference() -> Self {
        RunConfig::from_toml(REFERENCE_CONFIG).expect("bundled reference config is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Relative monitoring paths resolve against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut cfg.systems {
            if let Some(m) = &s.monitoring {
                if m.is_relative() {
                    s.monitoring = Some(base.join(m));
                }
            }
        }
        Ok(cfg)
    }

    pub fn with_master_seed(mut self, master: u64) -> Self {
        self.seeds = Seeds::from_master(master);
        self
    }

    pub fn module(&self, name: &str) -> Result<ModuleParams> {
        self.modules
            .get(name)
            .cloned()
            .or_else(|| bundled_module(name))
            .ok_or_else(|| Error::config(format!("unknown module `{name}`")))
    }

    pub fn inverter(&self, name: &str) -> Result<InverterParams> {
        self.inverters
            .get(name)
            .cloned()
            .or_else(|| bundled_inverter(name))
            .ok_or_else(|| Error::config(format!("unknown inverter `{name}`")))
    }

    pub fn system_spec(&self, s: &SystemConfig) -> Result<SystemSpec> {
        let spec = SystemSpec {
            name: s.name.clone(),
            module: self.module(&s.module)?,
            inverter: self.inverter(&s.inverter)?,
            array: ArrayConfig::new(s.modules_per_string, s.strings)?,
            orientation: ArrayOrientation::new(s.tilt, s.azimuth)?,
            dc_wiring: s.dc_wiring.into(),
            ac_wiring: s.ac_wiring.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn system_specs(&self) -> Result<Vec<SystemSpec>> {
        self.systems.iter().map(|s| self.system_spec(s)).collect()
    }

    pub fn faults(&self) -> Result<Vec<FaultSpec>> {
        let f = self.inject.faults.clone().unwrap_or_else(FaultSpec::standard_set);
        f.iter().try_for_each(FaultSpec::validate)?;
        Ok(f)
    }

    pub fn targets(&self) -> Result<Vec<TargetSignal>> {
        self.train.targets.iter().map(|t| TargetSignal::parse(t)).collect()
    }

    pub fn detect_signals(&self) -> Result<Vec<TargetSignal>> {
        self.detect.signals.iter().map(|t| TargetSignal::parse(t)).collect()
    }

    pub fn strategy(&self) -> Result<Strategy> {
        Strategy::parse(&self.detect.strategy)
    }

    pub fn grouping(&self) -> Result<Grouping> {
        match self.detect.grouping.as_str() {
            "slot_category" => Ok(Grouping::SlotCategory),
            "slot" => Ok(Grouping::Slot),
            "global" => Ok(Grouping::Global),
            g => Err(Error::config(format!(
                "unknown grouping `{g}` (slot_category, slot, global)"
            ))),
        }
    }

    /// Network settings for `target` on a training set of `rows` rows.
    pub fn network(&self, target: TargetSignal, rows: usize) -> NetworkConfig {
        let mut cfg = NetworkConfig::with_hidden(
            self.train
                .hidden
                .get(target.name())
                .copied()
                .unwrap_or(target.default_hidden()),
        );
        cfg.batch_size = self
            .train
            .batch_size
            .unwrap_or_else(|| NetworkConfig::scaled_batch(rows));
        if let Some(e) = self.train.epochs {
            cfg.epochs = e;
        }
        if let Some(d) = self.train.dropout {
            cfg.dropout = d;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        if self.systems.is_empty() {
            return Err(Error::config("at least one system is required"));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.systems {
            if s.name.is_empty()
                || !s
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::config(format!(
                    "system name `{}` must be non-empty [A-Za-z0-9_-]",
                    s.name
                )));
            }
            if !names.insert(&s.name) {
                return Err(Error::config(format!("duplicate system `{}`", s.name)));
            }
            self.system_spec(s)?;
        }
        if self.corpus.end < self.corpus.start {
            return Err(Error::config("corpus end precedes start"));
        }
        if self.synth.n_days <= self.detect.days || self.detect.days == 0 {
            return Err(Error::config(format!(
                "synth.n_days ({}) must exceed detect.days ({}) > 0 to leave training history",
                self.synth.n_days, self.detect.days
            )));
        }
        self.faults()?;
        if self.targets()?.is_empty() || self.detect_signals()?.is_empty() {
            return Err(Error::config("train.targets and detect.signals must be non-empty"));
        }
        let targets = self.targets()?;
        if let Some(s) = self.detect_signals()?.into_iter().find(|s| !targets.contains(s)) {
            return Err(Error::config(format!(
                "detect signal {s} has no trained network (add it to train.targets)"
            )));
        }
        for t in &targets {
            self.network(*t, 1000).validate()?;
        }
        self.strategy()?;
        self.grouping()?;
        Ok(())
    }
}
