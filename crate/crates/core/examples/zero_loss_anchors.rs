//! Optimized key rates and intensities at 0 dB for the baseline system.

use pdc_qkd::optimizer::{optimize_mu, DEFAULT_INTERVAL};
use pdc_qkd::protocol::{Protocol, Setup};

fn main() -> pdc_qkd::Result<()> {
    let mut setup = Setup::baseline();
    // calibrated extra loss between the source and the fibre
    setup.link.insertion_loss_db = 0.5;
    println!("{:<10} {:>10} {:>12}", "protocol", "mu*", "rate");
    for protocol in [Protocol::Pnr, Protocol::Infinite, Protocol::Ayki, Protocol::NonDecoy] {
        let r = optimize_mu(&setup, protocol, 0.0, DEFAULT_INTERVAL)?;
        println!("{:<10} {:>10.4} {:>12.4e}", protocol.name(), r.mu_star, r.rate_star);
    }
    Ok(())
}
