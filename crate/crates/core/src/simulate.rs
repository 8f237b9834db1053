//! Array production from weather: single-diode MPP per module, scaled to the
//! array, converted to AC by the inverter model. Losses are applied on top in the
//! plant's physical order: soiling, degradation and DC wiring before the
//! inverter, AC wiring after it.

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayOrientation;
use crate::losses::{DailyLoss, WiringSpec};
use crate::pv::{
    scale_to_array, snl_ac_power, solve_single_diode, translate_params, ArrayConfig, InverterParams, ModuleParams,
    OperatingConditions,
};
use crate::series::MeteoRecord;

/// One inverter with its array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub module: ModuleParams,
    pub inverter: InverterParams,
    pub array: ArrayConfig,
    pub orientation: ArrayOrientation,
    pub dc_wiring: WiringSpec,
    pub ac_wiring: WiringSpec,
}

impl SystemSpec {
    /// System A of the reference plant: 16 × 8 LG400N2W-A5 on an ABB TRIO-50.0.
    pub fn reference_a() -> Self {
        SystemSpec {
            name: "A".into(),
            module: ModuleParams::lg400n2w_a5(),
            inverter: InverterParams::abb_trio_50(),
            array: ArrayConfig {
                modules_per_string: 16,
                strings: 8,
            },
            orientation: ArrayOrientation {
                tilt: 10.0,
                azimuth: 180.0,
            },
            dc_wiring: WiringSpec::copper(120.0, 16.0),
            ac_wiring: WiringSpec::copper(30.0, 35.0),
        }
    }

    /// System B: 18 × 4 LG400N2W-A5 on an ABB TRIO-27.6.
    pub fn reference_b() -> Self {
        SystemSpec {
            name: "B".into(),
            inverter: InverterParams::abb_trio_27_6(),
            array: ArrayConfig {
                modules_per_string: 18,
                strings: 4,
            },
            dc_wiring: WiringSpec::copper(120.0, 10.0),
            ac_wiring: WiringSpec::copper(30.0, 16.0),
            ..SystemSpec::reference_a()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.module.validate()?;
        self.inverter.validate()?;
        self.orientation.validate()?;
        self.dc_wiring.validate()?;
        self.ac_wiring.validate()?;
        ArrayConfig::new(self.array.modules_per_string, self.array.strings)?;
        Ok(())
    }

    /// Total module aperture area, m².
    pub fn array_area(&self) -> f64 {
        self.module.area * self.array.modules() as f64
    }
}

/// Technical signals of the array at one timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductionSample {
    pub timestamp: NaiveDateTime,
    pub g_poa: f64,
    pub t_amb: f64,
    pub t_cell: f64,
    /// Array photocurrent, A.
    pub i_l: f64,
    pub i_sc: f64,
    pub v_oc: f64,
    pub i_dc: f64,
    pub v_dc: f64,
    pub p_dc: f64,
    pub p_ac: f64,
}

impl ProductionSample {
    pub fn dark(timestamp: NaiveDateTime, t_amb: f64, t_cell: f64) -> Self {
        ProductionSample {
            timestamp,
            g_poa: 0.0,
            t_amb,
            t_cell,
            i_l: 0.0,
            i_sc: 0.0,
            v_oc: 0.0,
            i_dc: 0.0,
            v_dc: 0.0,
            p_dc: 0.0,
            p_ac: 0.0,
        }
    }
}

/// Loss-free production at one weather sample.
pub fn simulate_point(sys: &SystemSpec, m: &MeteoRecord) -> Result<ProductionSample> {
    if m.g_poa <= 0.0 {
        return Ok(ProductionSample::dark(m.timestamp, m.t_amb, m.t_cell));
    }
    let dp = translate_params(&sys.module, &OperatingConditions::new(m.g_poa, m.t_cell))?;
    let mpp = scale_to_array(&solve_single_diode(&dp)?, &sys.array);
    let p_ac = snl_ac_power(mpp.p_mp.max(0.0), mpp.v_mp.max(0.0), &sys.inverter)?;
    Ok(ProductionSample {
        timestamp: m.timestamp,
        g_poa: m.g_poa,
        t_amb: m.t_amb,
        t_cell: m.t_cell,
        i_l: dp.i_l * sys.array.strings as f64,
        i_sc: mpp.i_sc,
        v_oc: mpp.v_oc,
        i_dc: mpp.i_mp,
        v_dc: mpp.v_mp,
        p_dc: mpp.p_mp,
        p_ac,
    })
}

pub fn simulate_series(sys: &SystemSpec, meteo: &[MeteoRecord]) -> Result<Vec<ProductionSample>> {
    meteo.par_iter().map(|m| simulate_point(sys, m)).collect()
}

/// Applies one day's loss factors to a loss-free sample.
///
/// Soiling and degradation reduce the light reaching the cells, so they scale
/// current and DC power; DC wiring scales DC power at the inverter input. The
/// inverter conversion is recomputed, then AC wiring scales AC power. The
/// inverter loss column is not applied again: the SNL model already carries it.
pub fn apply_losses(s: &ProductionSample, loss: &DailyLoss, inv: &InverterParams) -> Result<ProductionSample> {
    for f in [loss.soiling, loss.degradation, loss.dc_wiring, loss.ac_wiring] {
        if !(0.0..=100.0).contains(&f) {
            return Err(Error::input(format!("loss {f}% outside [0, 100]")));
        }
    }
    let optical = (1.0 - loss.soiling / 100.0) * (1.0 - loss.degradation / 100.0);
    let mut out = *s;
    out.i_l *= optical;
    out.i_sc *= optical;
    out.i_dc *= optical;
    out.p_dc *= optical * (1.0 - loss.dc_wiring / 100.0);
    out.p_ac = snl_ac_power(out.p_dc, out.v_dc, inv)? * (1.0 - loss.ac_wiring / 100.0);
    Ok(out)
}
