use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Irradiance at standard test conditions, W/m².
pub const G_STC: f64 = 1000.0;
/// Cell temperature at standard test conditions, °C.
pub const T_STC: f64 = 25.0;

/// Five-parameter CEC description of a PV module at reference conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleParams {
    pub name: String,
    /// Short-circuit current temperature coefficient, A/°C.
    pub alpha_sc: f64,
    /// Modified ideality factor at reference, V.
    pub a_ref: f64,
    pub i_l_ref: f64,
    pub i_o_ref: f64,
    pub r_sh_ref: f64,
    pub r_s: f64,
    /// Adjustment of `alpha_sc`, percent.
    pub adjust: f64,
    /// Bandgap at reference temperature, eV.
    pub eg_ref: f64,
    /// Relative bandgap temperature dependence, 1/K.
    pub d_eg_dt: f64,
    /// Relative maximum-power temperature coefficient, 1/°C.
    pub gamma_pmp: f64,
    pub cells_in_series: u32,
    /// Nominal operating cell temperature, °C.
    pub t_noct: f64,
    /// Module aperture area, m².
    pub area: f64,
    /// Nameplate power at STC, W.
    pub p_nameplate: f64,
}

impl ModuleParams {
    pub fn lg400n2w_a5() -> Self {
        toml::from_str(include_str!("../../data/module_lg400n2w_a5.toml")).expect("bundled module parameters parse")
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.i_l_ref > 0.0, "I_L_ref must be > 0"),
            (self.i_o_ref > 0.0, "I_o_ref must be > 0"),
            (self.r_s >= 0.0, "R_s must be >= 0"),
            (self.r_sh_ref > 0.0, "R_sh_ref must be > 0"),
            (self.a_ref > 0.0, "a_ref must be > 0"),
            ((0.0..=100.0).contains(&self.adjust), "Adjust must be in [0, 100]"),
            (self.area > 0.0, "module area must be > 0"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::config(format!("{}: {msg}", self.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingConditions {
    /// Effective plane-of-array irradiance, W/m².
    pub irradiance: f64,
    /// Cell temperature, °C.
    pub t_cell: f64,
}

impl OperatingConditions {
    pub fn new(irradiance: f64, t_cell: f64) -> Self {
        OperatingConditions { irradiance, t_cell }
    }

    pub fn stc() -> Self {
        OperatingConditions::new(G_STC, T_STC)
    }
}

/// Single-diode circuit parameters at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeParams {
    pub i_l: f64,
    pub i_o: f64,
    pub a: f64,
    pub r_s: f64,
    pub r_sh: f64,
}

impl DiodeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.i_l >= 0.0
            && self.i_o > 0.0
            && self.a > 0.0
            && self.r_s >= 0.0
            && self.r_sh > 0.0
            && [self.i_l, self.i_o, self.a, self.r_s, self.r_sh]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid diode parameters {self:?}")))
        }
    }
}

/// Maximum power point plus the curve end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MppResult {
    pub v_mp: f64,
    pub i_mp: f64,
    pub p_mp: f64,
    pub v_oc: f64,
    pub i_sc: f64,
}

impl MppResult {
    pub fn zero() -> Self {
        MppResult {
            v_mp: 0.0,
            i_mp: 0.0,
            p_mp: 0.0,
            v_oc: 0.0,
            i_sc: 0.0,
        }
    }
}

/// Sandia inverter model coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverterParams {
    pub name: String,
    pub p_ac0: f64,
    pub p_dc0: f64,
    pub v_dc0: f64,
    pub p_s0: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Nominal AC voltage, used to derive AC line current.
    pub v_ac: f64,
    #[serde(default)]
    pub mppt_low: Option<f64>,
    #[serde(default)]
    pub mppt_high: Option<f64>,
}

impl InverterParams {
    pub fn abb_trio_50() -> Self {
        toml::from_str(include_str!("../../data/inverter_abb_trio_50.toml")).expect("bundled inverter parameters parse")
    }

    pub fn abb_trio_27_6() -> Self {
        toml::from_str(include_str!("../../data/inverter_abb_trio_27_6.toml"))
            .expect("bundled inverter parameters parse")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_ac0 > 0.0 && self.p_dc0 > self.p_s0 && self.p_s0 >= 0.0 && self.v_dc0 > 0.0) {
            return Err(Error::config(format!(
                "{}: inverter requires P_AC0 > 0, P_DC0 > P_S0 >= 0, V_DC0 > 0",
                self.name
            )));
        }
        Ok(())
    }
}

/// Series/parallel layout of the modules feeding one inverter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub modules_per_string: u32,
    pub strings: u32,
}

impl ArrayConfig {
    pub fn new(modules_per_string: u32, strings: u32) -> Result<Self> {
        if modules_per_string == 0 || strings == 0 {
            return Err(Error::config(
                "array needs at least one module per string and one string",
            ));
        }
        Ok(ArrayConfig {
            modules_per_string,
            strings,
        })
    }

    pub fn modules(&self) -> u32 {
        self.modules_per_string * self.strings
    }
}
