//! Active weak decoy: the single-photon yield bound approaches the true
//! value as the decoy intensity goes to zero.

use pdc_qkd::estimators::{estimate_weak_decoy, KeyGroups};
use pdc_qkd::model::{ChannelParams, SourceParams};
use pdc_qkd::observables::closed_form_threshold;

fn main() -> pdc_qkd::Result<()> {
    let (mu, eta_a) = (0.5, 0.145);
    let ch = ChannelParams::from_loss(0.145, 10.0, 6.024e-6, 0.015)?;
    let obs_mu = closed_form_threshold(&SourceParams::new(mu)?, eta_a, &ch);
    let y1 = ch.yield_i(1);
    println!("true Y1 = {y1:.6e}");
    for nu in [0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4] {
        let obs_nu = closed_form_threshold(&SourceParams::new(nu)?, eta_a, &ch);
        let all = estimate_weak_decoy(&obs_mu, &obs_nu, mu, nu, eta_a, KeyGroups::All)?;
        println!(
            "nu = {nu:<7} Y1 >= {:.6e} ({:.3}%)  e1 <= {:.5}",
            all.y1_lower,
            100.0 * all.y1_lower / y1,
            all.e1_reported()
        );
    }
    Ok(())
}
