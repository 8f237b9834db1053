use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Production signal a fault can act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Signal {
    IDc,
    VDc,
    PDc,
    PAc,
    Voc,
    Isc,
    TCell,
}

impl Signal {
    pub const ALL: [Signal; 7] = [
        Signal::IDc,
        Signal::VDc,
        Signal::PDc,
        Signal::PAc,
        Signal::Voc,
        Signal::Isc,
        Signal::TCell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Signal::IDc => "i_dc",
            Signal::VDc => "v_dc",
            Signal::PDc => "p_dc",
            Signal::PAc => "p_ac",
            Signal::Voc => "v_oc",
            Signal::Isc => "i_sc",
            Signal::TCell => "t_cell",
        }
    }

    /// Unknown names are a configuration error.
    pub fn parse(s: &str) -> Result<Self> {
        Signal::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown fault target signal `{s}`")))
    }

    /// Acts before the inverter stage.
    pub fn is_dc(self) -> bool {
        self != Signal::PAc
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a magnitude `m` (percent) changes a target signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Effect {
    /// `x · (1 − m/100)`
    Derate,
    /// `x · (1 + m/100)`
    Raise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultTarget {
    pub signal: Signal,
    pub effect: Effect,
    /// Magnitude range, percent.
    pub min: f64,
    pub max: f64,
}

impl FaultTarget {
    pub fn derate(signal: Signal, min: f64, max: f64) -> Self {
        FaultTarget {
            signal,
            effect: Effect::Derate,
            min,
            max,
        }
    }

    pub fn raise(signal: Signal, min: f64, max: f64) -> Self {
        FaultTarget {
            signal,
            effect: Effect::Raise,
            min,
            max,
        }
    }

    /// Multiplier for a magnitude in percent.
    pub fn factor(&self, magnitude: f64) -> f64 {
        match self.effect {
            Effect::Derate => 1.0 - magnitude / 100.0,
            Effect::Raise => 1.0 + magnitude / 100.0,
        }
    }
}

/// A named fault and the signals it acts on.
///
/// Most faults draw one magnitude per affected point and apply it to every
/// target. Targets with their own range (SAF current and voltage, HSp's fixed
/// 2% power loss) draw independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub name: String,
    pub targets: Vec<FaultTarget>,
    /// `true` when all targets share a single draw.
    pub shared_draw: bool,
}

impl FaultSpec {
    pub fn new(name: impl Into<String>, targets: Vec<FaultTarget>, shared_draw: bool) -> Result<Self> {
        let s = FaultSpec {
            name: name.into(),
            targets,
            shared_draw,
        };
        s.validate()?;
        Ok(s)
    }

    /// Spec from target names, all derated over one shared range.
    pub fn from_names(name: &str, min: f64, max: f64, targets: &[&str]) -> Result<Self> {
        let targets = targets
            .iter()
            .map(|t| Signal::parse(t).map(|s| FaultTarget::derate(s, min, max)))
            .collect::<Result<Vec<_>>>()?;
        FaultSpec::new(name, targets, true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("fault name is empty"));
        }
        if self.targets.is_empty() {
            return Err(Error::config(format!("fault {} has no targets", self.name)));
        }
        for t in &self.targets {
            if !(0.0 <= t.min && t.min <= t.max && t.max <= 100.0) {
                return Err(Error::config(format!(
                    "fault {} range [{}, {}] outside 0 <= min <= max <= 100",
                    self.name, t.min, t.max
                )));
            }
        }
        if self.shared_draw {
            let (a, b) = (self.targets[0].min, self.targets[0].max);
            if self.targets.iter().any(|t| t.min != a || t.max != b) {
                return Err(Error::config(format!(
                    "fault {}: shared draw needs one range",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Lowest magnitude over all targets.
    pub fn min(&self) -> f64 {
        self.targets.iter().map(|t| t.min).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.targets.iter().map(|t| t.max).fold(0.0, f64::max)
    }

    /// Number of independent magnitudes drawn per affected point.
    pub fn draws(&self) -> usize {
        if self.shared_draw {
            1
        } else {
            self.targets.len()
        }
    }

    /// Target index to draw index.
    pub fn draw_of(&self, target: usize) -> usize {
        if self.shared_draw {
            0
        } else {
            target
        }
    }

    /// The eleven faults of the reference plant study.
    pub fn standard_set() -> Vec<FaultSpec> {
        use Signal::*;
        let shared = |name: &str, min: f64, max: f64, sig: &[Signal]| FaultSpec {
            name: name.into(),
            targets: sig.iter().map(|&s| FaultTarget::derate(s, min, max)).collect(),
            shared_draw: true,
        };
        vec![
            shared("SS", 10.0, 20.0, &[PDc]),
            shared("HS", 10.0, 70.0, &[PDc]),
            shared("SOI", 8.0, 12.0, &[PDc]),
            FaultSpec {
                name: "HSp".into(),
                targets: vec![FaultTarget::raise(TCell, 2.0, 2.0), FaultTarget::derate(PDc, 2.0, 2.0)],
                shared_draw: false,
            },
            shared("DEG", 0.0, 50.0, &[PDc]),
            FaultSpec {
                name: "CC".into(),
                targets: vec![
                    FaultTarget::raise(TCell, 0.9, 42.8),
                    FaultTarget::derate(PDc, 0.9, 42.8),
                ],
                shared_draw: true,
            },
            shared("LL", 20.0, 80.0, &[Voc]),
            shared("GF", 0.0, 51.9, &[Isc, PDc]),
            FaultSpec {
                name: "SAF".into(),
                targets: vec![FaultTarget::derate(IDc, 0.0, 62.5), FaultTarget::derate(VDc, 0.0, 80.0)],
                shared_draw: false,
            },
            shared("PAF", 0.0, 87.5, &[VDc]),
            shared("IF", 0.0, 100.0, &[PAc]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_set_matches_fault_table() {
        let set = FaultSpec::standard_set();
        let names: Vec<_> = set.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            ["SS", "HS", "SOI", "HSp", "DEG", "CC", "LL", "GF", "SAF", "PAF", "IF"]
        );
        for s in &set {
            s.validate().unwrap();
        }
        let get = |n: &str| set.iter().find(|s| s.name == n).unwrap();
        assert_eq!((get("SS").min(), get("SS").max()), (10.0, 20.0));
        assert_eq!(get("LL").targets[0].signal, Signal::Voc);
        let gf: Vec<_> = get("GF").targets.iter().map(|t| t.signal).collect();
        assert_eq!(gf, [Signal::Isc, Signal::PDc]);
        let saf = get("SAF");
        assert_eq!(saf.draws(), 2);
        assert_eq!((saf.targets[0].signal, saf.targets[0].max), (Signal::IDc, 62.5));
        assert_eq!((saf.targets[1].signal, saf.targets[1].max), (Signal::VDc, 80.0));
        assert_eq!((get("IF").targets[0].signal, get("IF").max()), (Signal::PAc, 100.0));
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(matches!(
            FaultSpec::from_names("X", 0.0, 10.0, &["q_dc"]),
            Err(Error::Config(_))
        ));
        assert!(FaultSpec::from_names("X", 20.0, 10.0, &["p_dc"]).is_err());
        assert!(FaultSpec::from_names("X", 0.0, 110.0, &["p_dc"]).is_err());
        assert!(FaultSpec::from_names("X", 0.0, 10.0, &[]).is_err());
        assert!(FaultSpec::from_names("X", 0.0, 10.0, &["P_DC", "v_oc"]).is_ok());
    }

    #[test]
    fn factors() {
        assert_eq!(FaultTarget::derate(Signal::PDc, 0.0, 1.0).factor(20.0), 0.8);
        assert_eq!(FaultTarget::raise(Signal::TCell, 0.0, 1.0).factor(2.0), 1.02);
    }
}
