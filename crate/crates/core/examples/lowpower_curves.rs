//! Spectral efficiency against Eb/N0 in the low-power regime, Rayleigh
//! fading, receiver-only and transmitter CSI.

use qos_energy::asymptotics::Regime;
use qos_energy::effcap::CsiMode;
use qos_energy::fading::FadingModel;
use qos_energy::sweep::{self, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FadingModel::rayleigh(1.0)?;
    for mode in [CsiMode::Csir, CsiMode::Csit] {
        let mut spec = SweepSpec::with_defaults(mode, Regime::LowPower, model.clone());
        spec.grid = sweep::log_grid(1e-4, 10.0, 6);
        println!("{mode}");
        for curve in sweep::tradeoff_curve(&spec)? {
            let pts: Vec<String> = curve
                .valid_points()
                .map(|(eb, se)| format!("({eb:.2} dB, {se:.3e})"))
                .collect();
            println!("  {:<12} {}", curve.label, pts.join(" "));
        }
    }
    Ok(())
}
