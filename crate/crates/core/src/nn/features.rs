use chrono::Datelike;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::train::Dataset;
use crate::error::{Error, Result};
use crate::faults::SynthRow;
use crate::series::hour_of_day;

pub const N_FEATURES: usize = 10;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "g_poa", "t_amb", "t_cell", "hour", "month", "k", "i_dc", "v_dc", "p_dc", "p_ac",
];

/// Estimator inputs; hour and month enter as `hour/24` and `month/12`.
pub fn features(r: &SynthRow) -> [f64; N_FEATURES] {
    [
        r.g_poa,
        r.t_amb,
        r.t_cell,
        hour_of_day(&r.timestamp) / 24.0,
        r.timestamp.month() as f64 / 12.0,
        r.k,
        r.i_dc,
        r.v_dc,
        r.p_dc,
        r.p_ac,
    ]
}

/// Technical signal estimated by one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TargetSignal {
    IL,
    Isc,
    Voc,
    EtaCell,
    EtaInv,
}

impl TargetSignal {
    pub const ALL: [TargetSignal; 5] = [
        TargetSignal::IL,
        TargetSignal::Isc,
        TargetSignal::Voc,
        TargetSignal::EtaCell,
        TargetSignal::EtaInv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetSignal::IL => "i_l",
            TargetSignal::Isc => "i_sc",
            TargetSignal::Voc => "v_oc",
            TargetSignal::EtaCell => "eta_cell",
            TargetSignal::EtaInv => "eta_inv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        TargetSignal::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown target signal `{s}`")))
    }

    /// Hidden-layer width used for this signal.
    pub fn default_hidden(self) -> usize {
        match self {
            TargetSignal::IL => 12,
            TargetSignal::Isc => 6,
            TargetSignal::Voc => 12,
            TargetSignal::EtaCell => 15,
            TargetSignal::EtaInv => 15,
        }
    }

    pub fn value(self, r: &SynthRow) -> f64 {
        match self {
            TargetSignal::IL => r.i_l,
            TargetSignal::Isc => r.i_sc,
            TargetSignal::Voc => r.v_oc,
            TargetSignal::EtaCell => r.eta_cell,
            TargetSignal::EtaInv => r.eta_inv,
        }
    }
}

impl fmt::Display for TargetSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows that carry production (`G_POA > 0` and `P_DC > 0`); night rows have
/// every target identically zero.
pub fn is_productive(r: &SynthRow) -> bool {
    r.g_poa > 0.0 && r.p_dc > 0.0
}

pub fn build_dataset(rows: &[SynthRow], target: TargetSignal) -> Dataset {
    let mut d = Dataset::new(N_FEATURES);
    for r in rows.iter().filter(|r| is_productive(r)) {
        d.x.extend_from_slice(&features(r));
        d.y.push(target.value(r));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::slot_time;
    use crate::simulate::ProductionSample;
    use crate::synth::SkyCategory;
    use chrono::NaiveDate;

    #[test]
    fn feature_layout() {
        let ts = slot_time(NaiveDate::from_ymd_opt(2021, 6, 2).unwrap(), 150);
        let s = ProductionSample {
            timestamp: ts,
            g_poa: 800.0,
            t_amb: 20.0,
            t_cell: 45.0,
            i_l: 70.0,
            i_sc: 69.0,
            v_oc: 700.0,
            i_dc: 65.0,
            v_dc: 600.0,
            p_dc: 39_000.0,
            p_ac: 38_000.0,
        };
        let r = SynthRow::new(&s, SkyCategory::Sc4, 0.64, 256.0, 0);
        let f = features(&r);
        assert_eq!(f[3], 12.5 / 24.0);
        assert_eq!(f[4], 0.5);
        assert_eq!(f[5], 0.64);
        assert_eq!(f[9], 38_000.0);
        assert_eq!(TargetSignal::EtaCell.value(&r), 39_000.0 / (800.0 * 256.0));
        assert_eq!(TargetSignal::parse("V_OC").unwrap(), TargetSignal::Voc);
        assert!(TargetSignal::parse("p_dc").is_err());
        let widths: Vec<_> = TargetSignal::ALL.iter().map(|t| t.default_hidden()).collect();
        assert_eq!(widths, [12, 6, 12, 15, 15]);
    }
}
