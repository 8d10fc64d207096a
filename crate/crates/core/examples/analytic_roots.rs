//! Optimal intensities from the analytic conditions: `mu* = x eta` for the
//! non-decoy protocol and `mu*` of order 1 with decoy states.

use pdc_qkd::optimizer::{solve_mu_decoy, solve_x_nondecoy};
use pdc_qkd::photonics::EcModel;
use pdc_qkd::search::lin_grid;

fn main() -> pdc_qkd::Result<()> {
    let ec = EcModel::default();
    println!("{:>6} {:>10} {:>10}", "e_d", "x", "mu_decoy");
    for e_d in lin_grid(0.0, 0.06, 7) {
        println!("{e_d:>6.3} {:>10.6} {:>10.6}", solve_x_nondecoy(e_d, &ec)?, solve_mu_decoy(e_d, &ec)?);
    }
    Ok(())
}
