//! CSIT threshold α as bandwidth grows, and its limit α*.

use qos_energy::fading::FadingModel;
use qos_energy::sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FadingModel::rayleigh(1.0)?;
    let zetas = sweep::log_grid(1e-9, 1e-3, 7);
    let curves = sweep::alpha_vs_zeta(&model, &[1e-3, 1e-2, 0.1, 1.0], 2e-3, 1e4, &zetas)?;
    for c in &curves {
        let alphas: Vec<String> = c
            .points
            .iter()
            .map(|(_, a)| a.map_or("gap".into(), |a| format!("{a:.4}")))
            .collect();
        println!(
            "θ={:<6} α*={:.5}  α(ζ): {}",
            c.theta,
            c.alpha_star.unwrap_or(f64::NAN),
            alphas.join(" ")
        );
    }
    Ok(())
}
