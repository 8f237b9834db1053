//! I-V curve and maximum power point of the LG400N2W-A5 module.

use pvtwin::pv::{current_at, solve_single_diode, translate_params, ModuleParams, OperatingConditions};

fn main() -> pvtwin::Result<()> {
    let module = ModuleParams::lg400n2w_a5();
    for (g, t) in [(1000.0, 25.0), (800.0, 45.0), (200.0, 20.0)] {
        let dp = translate_params(&module, &OperatingConditions::new(g, t))?;
        let mpp = solve_single_diode(&dp)?;
        println!(
            "G={g:>6.0} W/m²  T={t:>4.1} °C  Isc={:.3} A  Voc={:.3} V  Vmp={:.3} V  Imp={:.3} A  Pmp={:.1} W",
            mpp.i_sc, mpp.v_oc, mpp.v_mp, mpp.i_mp, mpp.p_mp
        );
    }

    // plot-ready curve at STC
    let dp = translate_params(&module, &OperatingConditions::stc())?;
    let mpp = solve_single_diode(&dp)?;
    println!("\nv,i,p");
    for k in 0..=20 {
        let v = mpp.v_oc * k as f64 / 20.0;
        let i = current_at(&dp, v)?;
        println!("{v:.3},{i:.4},{:.2}", v * i);
    }
    Ok(())
}
