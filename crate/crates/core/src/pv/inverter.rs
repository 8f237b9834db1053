//! Sandia (SNL) grid-tied inverter model.

use serde::{Deserialize, Serialize};

use super::params::InverterParams;
use crate::error::{Error, Result};

/// Voltage-dependent terms of the SNL polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnlCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn snl_coefficients(v_dc: f64, inv: &InverterParams) -> SnlCoefficients {
    let dv = v_dc - inv.v_dc0;
    SnlCoefficients {
        a: inv.p_dc0 * (1.0 + inv.c1 * dv),
        b: inv.p_s0 * (1.0 + inv.c2 * dv),
        c: inv.c0 * (1.0 + inv.c3 * dv),
    }
}

/// AC output for DC input `(p_dc, v_dc)`.
///
/// Zero at or below the start-up power `B`, clipped at `P_AC0` above.
pub fn snl_ac_power(p_dc: f64, v_dc: f64, inv: &InverterParams) -> Result<f64> {
    if !(p_dc >= 0.0) || !(v_dc >= 0.0) {
        return Err(Error::input(format!(
            "SNL inverter needs P_DC, V_DC >= 0 (got {p_dc}, {v_dc})"
        )));
    }
    let SnlCoefficients { a, b, c } = snl_coefficients(v_dc, inv);
    if a == b {
        return Err(Error::numerical(format!("SNL terms A and B coincide at V_DC = {v_dc}")));
    }
    if p_dc <= b {
        return Ok(0.0);
    }
    let x = p_dc - b;
    let raw = (inv.p_ac0 / (a - b) - c * (a - b)) * x + c * x * x;
    Ok(raw.clamp(0.0, inv.p_ac0))
}
