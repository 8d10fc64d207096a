//! Photon-pair number distribution of a PDC source and its tail mass.

use pdc_qkd::photonics::{thermal_pn, thermal_tail};

fn main() -> pdc_qkd::Result<()> {
    for mu in [0.0589, 0.194, 0.52, 1.0] {
        print!("mu = {mu:<7}");
        for n in 0..5 {
            print!("  P({n}) = {:.4e}", thermal_pn(mu, n)?);
        }
        println!("  P(n>=5) = {:.3e}", thermal_tail(mu, 5)?);
    }
    Ok(())
}
