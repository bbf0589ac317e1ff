//! Effective capacity between the delay-limited and ergodic capacities,
//! plus a Monte-Carlo check.

use qos_energy::effcap::{self, CsiMode, QosConfig};
use qos_energy::fading::FadingModel;
use qos_energy::queuesim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = FadingModel::nakagami(2.0, 1.0)?;
    let snr = 1.0;
    for mode in [CsiMode::Csir, CsiMode::Csit] {
        let lo = effcap::delay_limited_limit(snr, mode, &model)?.spectral_efficiency;
        let hi = effcap::shannon_limit(snr, mode, &model)?;
        println!("{mode}: delay-limited {lo:.4}, ergodic {hi:.4} bit/s/Hz");
        for theta in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let q = QosConfig::new(theta, 2e-3, 1e5)?;
            let se = effcap::spectral_efficiency(mode, snr, &q, &model)?;
            let mc = queuesim::effective_capacity_empirical(&model, snr, &q, mode, 200_000, 7)?;
            println!(
                "  θ={theta:<6} {se:.4}   simulated {:.4} ± {:.4}",
                mc.value / q.bandwidth,
                mc.std_error / q.bandwidth
            );
        }
    }
    Ok(())
}
