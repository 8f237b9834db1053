//! CEC single-diode model: parameter translation and I-V solution.

use super::lambert::lambert_w0_exp;
use super::params::{ArrayConfig, DiodeParams, ModuleParams, MppResult, OperatingConditions, G_STC, T_STC};
use crate::error::{Error, Result};

/// Boltzmann constant, eV/K.
pub const K_BOLTZMANN_EV: f64 = 8.617_333_262e-5;
const KELVIN: f64 = 273.15;
const MAX_NEWTON: usize = 100;
const MAX_BISECT: usize = 200;

/// `α'_sc = α_sc·(1 − Adjust/100)`.
pub fn adjust_alpha(params: &ModuleParams) -> f64 {
    params.alpha_sc * (1.0 - params.adjust / 100.0)
}

/// Light-generated current at `cond`, taking `I_L_ref` as the STC short-circuit current.
pub fn photocurrent(params: &ModuleParams, cond: &OperatingConditions) -> f64 {
    cond.irradiance / G_STC * (params.i_l_ref + adjust_alpha(params) * (cond.t_cell - T_STC))
}

/// De Soto translation of the reference parameters to `cond`.
pub fn translate_params(params: &ModuleParams, cond: &OperatingConditions) -> Result<DiodeParams> {
    if !(cond.irradiance >= 0.0) || !cond.t_cell.is_finite() {
        return Err(Error::input(format!("invalid operating conditions {cond:?}")));
    }
    if cond.irradiance == 0.0 {
        return Err(Error::Degenerate("irradiance is zero".into()));
    }
    let t_ref = T_STC + KELVIN;
    let t = cond.t_cell + KELVIN;
    let eg = params.eg_ref * (1.0 + params.d_eg_dt * (t - t_ref));
    let i_o = params.i_o_ref
        * (t / t_ref).powi(3)
        * (params.eg_ref / (K_BOLTZMANN_EV * t_ref) - eg / (K_BOLTZMANN_EV * t)).exp();
    Ok(DiodeParams {
        i_l: photocurrent(params, cond),
        i_o,
        a: params.a_ref * t / t_ref,
        r_s: params.r_s,
        r_sh: params.r_sh_ref * G_STC / cond.irradiance,
    })
}

/// `f(V, I) − I` for the implicit single-diode equation; zero on the I-V curve.
pub fn residual(dp: &DiodeParams, v: f64, i: f64) -> f64 {
    let vd = v + i * dp.r_s;
    dp.i_l - dp.i_o * (vd / dp.a).exp_m1() - vd / dp.r_sh - i
}

fn residual_slope(dp: &DiodeParams, v: f64, i: f64) -> f64 {
    let vd = v + i * dp.r_s;
    -dp.i_o * (vd / dp.a).exp() * dp.r_s / dp.a - dp.r_s / dp.r_sh - 1.0
}

fn explicit_current(dp: &DiodeParams, v: f64) -> f64 {
    let g_sh = 1.0 / dp.r_sh;
    if dp.r_s == 0.0 {
        return dp.i_l - dp.i_o * (v / dp.a).exp_m1() - g_sh * v;
    }
    let k = dp.r_s * g_sh + 1.0;
    let log_arg = (dp.r_s * dp.i_o / (dp.a * k)).ln() + (dp.r_s * (dp.i_l + dp.i_o) + v) / (dp.a * k);
    let w = lambert_w0_exp(log_arg);
    (dp.i_l + dp.i_o - v * g_sh) / k - dp.a / dp.r_s * w
}

fn bisect_current(dp: &DiodeParams, v: f64) -> Result<f64> {
    // residual is strictly decreasing in I
    let mut hi = dp.i_l.max(0.0) + 1.0;
    let mut lo = -1.0;
    let mut n = 0;
    while residual(dp, v, lo) < 0.0 {
        lo *= 2.0;
        n += 1;
        if n > 200 {
            return Err(Error::numerical(format!(
                "cannot bracket current at V = {v} for {dp:?}"
            )));
        }
    }
    while residual(dp, v, hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if residual(dp, v, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Terminal current at voltage `v`.
///
/// Explicit Lambert-W solution polished by Newton steps on the residual; falls
/// back to bisection if either produces a non-finite value.
pub fn current_at(dp: &DiodeParams, v: f64) -> Result<f64> {
    let mut i = explicit_current(dp, v);
    if i.is_finite() {
        for _ in 0..MAX_NEWTON {
            let r = residual(dp, v, i);
            if r.abs() <= 1e-13 * dp.i_l.abs().max(1.0) {
                return Ok(i);
            }
            let next = i - r / residual_slope(dp, v, i);
            if !next.is_finite() {
                break;
            }
            if next == i {
                return Ok(i);
            }
            i = next;
        }
        if residual(dp, v, i).abs() <= 1e-10 {
            return Ok(i);
        }
    }
    let i = bisect_current(dp, v)?;
    let r = residual(dp, v, i);
    if r.abs() > 1e-9 {
        return Err(Error::numerical(format!(
            "current solve did not converge at V = {v}: residual {r:e} for {dp:?}"
        )));
    }
    Ok(i)
}

/// Open-circuit voltage: root of `I_L − I_o·(e^{V/a} − 1) − V/R_sh`.
///
/// The function is concave and decreasing, so Newton from the right end of the
/// bracket `[0, a·ln(1 + I_L/I_o)]` converges monotonically.
pub fn open_circuit_voltage(dp: &DiodeParams) -> Result<f64> {
    if dp.i_l <= 0.0 {
        return Ok(0.0);
    }
    let h = |v: f64| dp.i_l - dp.i_o * (v / dp.a).exp_m1() - v / dp.r_sh;
    let mut v = dp.a * (dp.i_l / dp.i_o).ln_1p();
    for _ in 0..MAX_NEWTON {
        let hv = h(v);
        let slope = -dp.i_o / dp.a * (v / dp.a).exp() - 1.0 / dp.r_sh;
        let next = (v - hv / slope).max(0.0);
        if (next - v).abs() <= 1e-15 * v.abs() || next == v {
            return Ok(next);
        }
        v = next;
    }
    if h(v).abs() <= 1e-10 {
        Ok(v)
    } else {
        Err(Error::numerical(format!(
            "open-circuit voltage did not converge for {dp:?}"
        )))
    }
}

/// Maximum power point of the I-V curve, with `I_sc` and `V_oc`.
pub fn solve_single_diode(dp: &DiodeParams) -> Result<MppResult> {
    dp.validate()?;
    if dp.i_l == 0.0 {
        return Ok(MppResult::zero());
    }
    let v_oc = open_circuit_voltage(dp)?;
    let i_sc = current_at(dp, 0.0)?;

    let power = |v: f64| -> Result<f64> { Ok(v * current_at(dp, v)?) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, v_oc);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut pc = power(c)?;
    let mut pd = power(d)?;
    let tol = 1e-9 * v_oc.max(1e-12);
    let mut iter = 0;
    while b - a > tol {
        iter += 1;
        if iter > 200 {
            return Err(Error::numerical("maximum-power search exceeded iteration cap"));
        }
        if pc >= pd {
            b = d;
            d = c;
            pd = pc;
            c = b - inv_phi * (b - a);
            pc = power(c)?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + inv_phi * (b - a);
            pd = power(d)?;
        }
    }
    let v_mp = 0.5 * (a + b);
    let i_mp = current_at(dp, v_mp)?;
    Ok(MppResult {
        v_mp,
        i_mp,
        p_mp: v_mp * i_mp,
        v_oc,
        i_sc,
    })
}

/// Module MPP to array MPP: voltages scale with the series count, currents with strings.
pub fn scale_to_array(mpp: &MppResult, cfg: &ArrayConfig) -> MppResult {
    let s = cfg.modules_per_string as f64;
    let p = cfg.strings as f64;
    MppResult {
        v_mp: mpp.v_mp * s,
        i_mp: mpp.i_mp * p,
        p_mp: mpp.p_mp * s * p,
        v_oc: mpp.v_oc * s,
        i_sc: mpp.i_sc * p,
    }
}
