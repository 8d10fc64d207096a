use super::{clamp_single, EstimatorKind, SinglePhotonBounds};
use crate::observables::ObservedStatistics;
use crate::photonics::pn;

/// Worst-case bounds attributing every loss and error to single photons.
///
/// The multi-photon contributions `sum_{i>=2} P(i) eta_{j|i}` are
/// subtracted in closed form for a threshold trigger; vacuum is bounded by 0
/// and `e_1` is bounded separately for each group.
pub fn estimate_nondecoy(obs: &ObservedStatistics, mu: f64, eta_a: f64) -> SinglePhotonBounds {
    let groups = obs.groups.len().min(2);
    let mut b = SinglePhotonBounds::new(EstimatorKind::NonDecoy, groups);
    let denom = (1.0 + eta_a * mu) * (1.0 + mu).powi(2);
    let multi = [
        (1.0 - eta_a).powi(2) * mu * mu / denom,
        eta_a * (2.0 - eta_a + mu) * mu * mu / denom,
    ];
    for j in 0..groups {
        let raw = obs.gain(j) - multi[j];
        let (q1, e1, vacuous) = clamp_single(raw, obs.error_count(j));
        b.q1_lower[j] = q1;
        b.e1_upper[j] = e1;
        b.vacuous[j] = vacuous;
    }
    let p1 = pn(mu, 1);
    if p1 > 0.0 {
        b.y1_lower = (b.q1_lower.iter().sum::<f64>() / p1).min(1.0);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{threshold_response, ChannelParams, SourceParams, ThresholdMode};
    use crate::observables::{closed_form_threshold, true_decomposition};
    use crate::photonics::{distribution, TRUNCATION};

    const ETA_A: f64 = 0.145;

    #[test]
    fn small_mu_is_tight() {
        let ch = ChannelParams::new(0.1, 0.0, 0.02).unwrap();
        let mu = 1e-5;
        let obs = closed_form_threshold(&SourceParams::new(mu).unwrap(), ETA_A, &ch);
        let b = estimate_nondecoy(&obs, mu, ETA_A);
        assert!((b.q1_lower[1] / obs.gain(1) - 1.0).abs() < 1e-3);
        assert!((b.e1_upper[1] - 0.02).abs() < 1e-4);
    }

    #[test]
    fn sandwich_at_large_mu() {
        let ch = ChannelParams::from_loss(0.145, 0.0, 6.024e-6, 0.015).unwrap();
        let src = SourceParams::new(1.0).unwrap();
        let obs = closed_form_threshold(&src, ETA_A, &ch);
        let truth = true_decomposition(&src, ETA_A, &ch);
        let b = estimate_nondecoy(&obs, 1.0, ETA_A);
        for j in 0..2 {
            assert!(b.q1_lower[j] <= truth.q1[j]);
            assert!(b.e1_upper[j] >= truth.e1);
        }
    }

    #[test]
    fn closed_form_matches_series() {
        let det = threshold_response(ETA_A, 0.0, ThresholdMode::Approximate).unwrap();
        for &mu in &[0.01, 0.194, 0.52, 1.0] {
            let denom = (1.0 + ETA_A * mu) * (1.0 + mu).powi(2);
            let printed = [
                (1.0 - ETA_A).powi(2) * mu * mu / denom,
                ETA_A * (2.0 - ETA_A + mu) * mu * mu / denom,
            ];
            for (j, &value) in printed.iter().enumerate() {
                let series: f64 = distribution(mu, TRUNCATION)
                    .skip(2)
                    .map(|(i, p)| p * det.response(j, i))
                    .sum();
                assert!((series - value).abs() < 1e-14, "mu={mu} j={j}");
            }
        }
    }

    #[test]
    fn degenerate_input_clamps() {
        let ch = ChannelParams::new(1e-4, 1e-6, 0.02).unwrap();
        let obs = closed_form_threshold(&SourceParams::new(0.5).unwrap(), ETA_A, &ch);
        let b = estimate_nondecoy(&obs, 0.5, ETA_A);
        assert_eq!(b.q1_lower, vec![0.0, 0.0]);
        assert_eq!(b.e1_upper, vec![1.0, 1.0]);
        assert!(b.vacuous.iter().all(|&v| v));
    }
}
