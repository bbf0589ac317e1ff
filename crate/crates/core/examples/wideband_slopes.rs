//! Wideband minimum bit energy and slope, CSIR against CSIT, at
//! P̄/N0 = 1e4 and T = 2 ms.

use qos_energy::asymptotics::{self, WidebandParams};
use qos_energy::fading::FadingModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        ("rayleigh", FadingModel::rayleigh(1.0)?),
        ("nakagami-2", FadingModel::nakagami(2.0, 1.0)?),
    ];
    for (name, model) in &models {
        println!("{name}");
        for theta in [1e-3, 1e-2, 0.1, 1.0] {
            let p = WidebandParams::new(theta, 2e-3, 1e4)?;
            let r = asymptotics::wideband_csir(model, &p)?;
            let t = asymptotics::wideband_csit(model, &p)?;
            println!(
                "  θ={theta:<6} CSIR {:>7.3} dB S0={:.4}   CSIT {:>7.3} dB S0={:.4}",
                r.ebn0_min_db, r.slope_s0, t.ebn0_min_db, t.slope_s0
            );
        }
    }
    // The Rayleigh CSIR slope also has a closed form.
    let p = WidebandParams::new(0.1, 2e-3, 1e4)?;
    let closed = asymptotics::wideband_csir_rayleigh_closed_form(&p);
    println!("closed form at θ=0.1: S0={:.6}", closed.slope_s0);
    Ok(())
}
