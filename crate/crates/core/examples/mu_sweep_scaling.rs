//! Optimal intensity against loss: non-decoy tracks the transmittance, the
//! decoy protocols stay of order 1, and the rates scale as eta^2 and eta.

use pdc_qkd::optimizer::mu_sweep;
use pdc_qkd::protocol::{Protocol, Setup};
use pdc_qkd::search::lin_grid;

fn main() -> pdc_qkd::Result<()> {
    let mut setup = Setup::baseline();
    setup.link.insertion_loss_db = 0.5;
    let protocols = [Protocol::NonDecoy, Protocol::Infinite];
    let rows = mu_sweep(&setup, &protocols, &lin_grid(0.0, 30.0, 7), (1e-6, 1.0))?;
    println!("{:>5} {:<9} {:>9} {:>11} {:>9}", "loss", "protocol", "mu*", "rate", "mu*/eta");
    for r in &rows {
        let eta = setup.link.channel(r.loss_db)?.eta;
        println!(
            "{:>5} {:<9} {:>9.5} {:>11.4e} {:>9.4}",
            r.loss_db,
            r.protocol.name(),
            r.mu_star,
            r.rate_star,
            r.mu_star / eta
        );
    }
    Ok(())
}
