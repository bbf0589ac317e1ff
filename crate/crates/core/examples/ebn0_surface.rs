//! Wideband Eb/N0 floor over a (θ, P̄/N0) grid.

use qos_energy::effcap::CsiMode;
use qos_energy::fading::FadingModel;
use qos_energy::sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FadingModel::nakagami(2.0, 1.0)?;
    let thetas = sweep::log_grid(1e-3, 1.0, 4);
    let pbar = sweep::log_grid(1e2, 1e6, 5);
    let s = sweep::ebn0_min_surface(CsiMode::Csir, &model, &thetas, &pbar, 2e-3);
    print!("{:>10}", "θ \\ P̄/N0");
    for p in &pbar {
        print!("{p:>10.0e}");
    }
    println!();
    for (theta, row) in thetas.iter().zip(&s.cells) {
        print!("{theta:>10.0e}");
        for cell in row {
            match cell {
                Ok(db) => print!("{db:>10.3}"),
                Err(_) => print!("{:>10}", "fail"),
            }
        }
        println!();
    }
    Ok(())
}
