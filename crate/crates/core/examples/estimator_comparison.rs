//! Single-photon bounds of every estimator against the true values.

use pdc_qkd::estimators::{
    ayki_q00_range, default_truncation, estimate_ayki, estimate_infinite, estimate_nondecoy,
    estimate_passive_general, estimate_weak_decoy, KeyGroups,
};
use pdc_qkd::model::{threshold_response, ChannelParams, SourceParams, ThresholdMode};
use pdc_qkd::observables::{closed_form_threshold, true_decomposition};

fn main() -> pdc_qkd::Result<()> {
    let (mu, nu, eta_a) = (0.3, 0.02, 0.145);
    for loss in [0.0, 10.0, 20.0] {
        let ch = ChannelParams::from_loss(0.145, loss, 6.024e-6, 0.015)?;
        let src = SourceParams::new(mu)?;
        let obs = closed_form_threshold(&src, eta_a, &ch);
        let obs_nu = closed_form_threshold(&SourceParams::new(nu)?, eta_a, &ch);
        let truth = true_decomposition(&src, eta_a, &ch);
        let det = threshold_response(eta_a, 0.0, ThresholdMode::Approximate)?;

        let (_, hi) = ayki_q00_range(&obs);
        let rows = [
            ("infinite", estimate_infinite(&truth)),
            ("weak", estimate_weak_decoy(&obs, &obs_nu, mu, nu, eta_a, KeyGroups::All)?),
            ("ayki", estimate_ayki(&obs, mu, eta_a, hi)?),
            ("passive", estimate_passive_general(&obs, &det, default_truncation(mu, &det))?),
            ("nondecoy", estimate_nondecoy(&obs, mu, eta_a)),
        ];
        println!("{loss} dB: true Y1 = {:.5e}, e1 = {:.4}", truth.y1, truth.e1);
        for (name, b) in rows {
            println!(
                "  {name:<9} Y1 >= {:.5e} ({:6.1}%)  e1 <= {:.4}",
                b.y1_lower,
                100.0 * b.y1_lower / truth.y1,
                b.e1_reported()
            );
        }
    }
    Ok(())
}
