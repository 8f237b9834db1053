//! Sandia inverter model: AC output and efficiency across the DC power range.

use pvtwin::pv::{snl_ac_power, InverterParams};

fn main() -> pvtwin::Result<()> {
    let inv = InverterParams::abb_trio_50();
    println!(
        "{}: P_AC0 = {} W, P_DC0 = {} W, P_S0 = {} W",
        inv.name, inv.p_ac0, inv.p_dc0, inv.p_s0
    );
    println!("p_dc,v_dc,p_ac,efficiency");
    for frac in [0.0, 0.002, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.1] {
        let p_dc = inv.p_dc0 * frac;
        for v in [550.0, inv.v_dc0, 800.0] {
            let p_ac = snl_ac_power(p_dc, v, &inv)?;
            let eff = if p_dc > 0.0 { p_ac / p_dc } else { 0.0 };
            println!("{p_dc:.0},{v:.0},{p_ac:.1},{eff:.4}");
        }
    }
    Ok(())
}
