//! Per-group AYKI key rates along the loss axis. Non-triggered events stop
//! contributing well before the cutoff, which shows up as a kink in the
//! total rate.

use pdc_qkd::optimizer::optimize_mu;
use pdc_qkd::protocol::{Protocol, Setup};
use pdc_qkd::search::lin_grid;

fn main() -> pdc_qkd::Result<()> {
    let mut setup = Setup::baseline();
    setup.link.insertion_loss_db = 0.5;
    println!("{:>5} {:>9} {:>11} {:>11} {:>11}", "loss", "mu*", "R_0", "R_1", "R");
    for loss in lin_grid(20.0, 36.0, 17) {
        let mu = optimize_mu(&setup, Protocol::Ayki, loss, (1e-6, 1.0))?.mu_star;
        let r = setup.evaluate(Protocol::Ayki, mu, loss)?.report;
        println!(
            "{loss:>5} {mu:>9.5} {:>11.4e} {:>11.4e} {:>11.4e}",
            r.groups[0].clamped, r.groups[1].clamped, r.total
        );
    }
    Ok(())
}
