//! DC and AC production of a PV array.
//!
//! [`diode`] translates the CEC reference parameters to operating conditions and
//! solves the single-diode circuit for the maximum power point; [`inverter`]
//! converts array DC output to AC with the Sandia (SNL) inverter model.

pub mod diode;
pub mod inverter;
pub mod lambert;
mod params;

pub use diode::{
    adjust_alpha, current_at, open_circuit_voltage, photocurrent, residual, scale_to_array, solve_single_diode,
    translate_params,
};
pub use inverter::{snl_ac_power, snl_coefficients, SnlCoefficients};
pub use params::{
    ArrayConfig, DiodeParams, InverterParams, ModuleParams, MppResult, OperatingConditions, G_STC, T_STC,
};
