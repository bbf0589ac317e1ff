//! Simulated buffer overflow decay at the effective-capacity arrival rate.

use qos_energy::effcap::{self, CsiMode, QosConfig};
use qos_energy::fading::FadingModel;
use qos_energy::queuesim::{self, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FadingModel::rayleigh(1.0)?;
    let theta = 0.05;
    let qos = QosConfig::new(theta, 2e-3, 1e5)?;
    let rate = effcap::effective_capacity(CsiMode::Csir, 1.0, &qos, &model)?;
    println!("effective capacity {rate:.1} bit/s");
    for seed in 0..3 {
        let cfg = SimConfig::new(
            model.clone(),
            1.0,
            qos,
            CsiMode::Csir,
            rate,
            1_000_000,
            seed,
        );
        let est = queuesim::simulate_queue(&cfg)?;
        println!(
            "seed {seed}: decay {:.5} (θ={theta}), R²={:.4}",
            est.fitted_decay, est.fit_rsquared
        );
    }
    Ok(())
}
