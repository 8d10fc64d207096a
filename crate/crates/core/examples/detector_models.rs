//! Trigger statistics for a threshold detector and for photon-number
//! resolving detectors of increasing resolution.

use pdc_qkd::model::{threshold_response, ChannelParams, SourceParams, ThresholdMode};
use pdc_qkd::observables::{closed_form_threshold, observe, pnr_observables};

fn main() -> pdc_qkd::Result<()> {
    let mu = 0.5;
    let src = SourceParams::new(mu)?;
    let ch = ChannelParams::from_loss(0.145, 10.0, 6.024e-6, 0.015)?;

    let closed = closed_form_threshold(&src, 0.145, &ch);
    println!("threshold, eta_A = 0.145 (closed form)");
    for (j, g) in closed.groups.iter().enumerate() {
        println!("  j={j}  Q = {:.6e}  E = {:.4}", g.gain, g.qber);
    }

    // dark counts at the trigger move events from j = 0 to j = 1
    let noisy = observe(&src, &threshold_response(0.145, 1e-3, ThresholdMode::Exact)?, &ch);
    println!("threshold, eta_A = 0.145, dark count 1e-3");
    for (j, g) in noisy.groups.iter().enumerate() {
        println!("  j={j}  Q = {:.6e}  E = {:.4}", g.gain, g.qber);
    }

    for k_max in [1, 2, 4] {
        let obs = pnr_observables(&src, &ch, k_max)?;
        println!("perfect PNR, k_max = {k_max}");
        for (j, g) in obs.groups.iter().enumerate() {
            println!("  j={j}  P = {:.4}  Q = {:.6e}  E = {:.4}", g.trigger_prob, g.gain, g.qber);
        }
    }
    Ok(())
}
