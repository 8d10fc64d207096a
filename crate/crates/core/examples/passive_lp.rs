//! Generalized passive decoy: linear-programming bounds from the statistics
//! of every trigger outcome, for threshold and photon-number resolving
//! triggers, with exact and interval-valued inputs.

use pdc_qkd::estimators::{
    default_truncation, estimate_passive_bounded, GroupIntervals, VacuumCoupling,
};
use pdc_qkd::finite::fluctuate_pulses;
use pdc_qkd::model::{pnr_response, threshold_response, ChannelParams, SourceParams, ThresholdMode};
use pdc_qkd::observables::observe;

fn main() -> pdc_qkd::Result<()> {
    let mu = 0.3;
    let src = SourceParams::new(mu)?;
    let ch = ChannelParams::from_loss(0.145, 10.0, 6.024e-6, 0.015)?;
    let y1 = ch.yield_i(1);
    println!("true Y1 = {y1:.6e}");

    let detectors = [
        ("threshold", threshold_response(0.145, 0.0, ThresholdMode::Approximate)?),
        ("pnr k=2", pnr_response(2)?),
        ("pnr k=4", pnr_response(4)?),
    ];
    for (name, det) in detectors {
        let obs = observe(&src, &det, &ch);
        let t = default_truncation(mu, &det);
        for coupling in [VacuumCoupling::Relaxed, VacuumCoupling::Joint] {
            let b = estimate_passive_bounded(&GroupIntervals::exact(&obs), &det, t, coupling)?;
            println!("{name:<10} {coupling:?}  Y1 >= {:.6e}  e1 <= {:.4}", b.y1_lower, b.e1_reported());
        }
        // finite statistics widen every constraint
        let bounded = fluctuate_pulses(&obs, 1e10, 5.0)?;
        let intervals = GroupIntervals {
            mu,
            gain: bounded.gain.iter().map(|i| (i.lower, i.upper)).collect(),
            error_count: bounded.error_count.iter().map(|i| (i.lower, i.upper)).collect(),
        };
        let b = estimate_passive_bounded(&intervals, &det, t, VacuumCoupling::Joint)?;
        println!("{name:<10} 1e10 pulses  Y1 >= {:.6e}  e1 <= {:.4}", b.y1_lower, b.e1_reported());
    }
    Ok(())
}
