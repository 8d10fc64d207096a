//! Eve-free forward model of the statistics Alice and Bob measure, grouped
//! by Alice's trigger outcome `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, DetectorResponse, SourceParams};
use crate::photonics::{distribution, pn, tail, TRUNCATION};

/// Measured quantities of one trigger group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// `Q_{mu,j}`: probability per pump pulse of trigger `j` and a Bob click.
    pub gain: f64,
    /// `E_{mu,j}`: error rate among those clicks.
    pub qber: f64,
    /// `P_Aj`: probability of trigger outcome `j`.
    pub trigger_prob: f64,
}

impl GroupStats {
    /// Error-count rate `E_{mu,j} Q_{mu,j}`.
    pub fn error_count(&self) -> f64 {
        self.gain * self.qber
    }
}

/// Per-trigger-outcome statistics for one source intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedStatistics {
    pub mu: f64,
    pub groups: Vec<GroupStats>,
}

impl ObservedStatistics {
    /// Detector resolution `N` (the number of groups minus one).
    pub fn resolution(&self) -> usize {
        self.groups.len().saturating_sub(1)
    }

    pub fn gain(&self, j: usize) -> f64 {
        self.groups[j].gain
    }

    pub fn qber(&self, j: usize) -> f64 {
        self.groups[j].qber
    }

    pub fn error_count(&self, j: usize) -> f64 {
        self.groups[j].error_count()
    }

    /// `sum_j Q_{mu,j}`.
    pub fn total_gain(&self) -> f64 {
        self.groups.iter().map(|g| g.gain).sum()
    }
}

/// Vacuum and single-photon contributions known only to the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueDecomposition {
    pub mu: f64,
    /// `Q_{0,j}` per trigger outcome.
    pub q0: Vec<f64>,
    /// `Q_{1,j}` per trigger outcome.
    pub q1: Vec<f64>,
    pub e1: f64,
    pub y1: f64,
}

/// A truncated series value with a rigorous bound on the neglected terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    pub value: f64,
    pub tail_bound: f64,
}

fn check_outcome(det: &DetectorResponse, j: usize) -> Result<()> {
    if j > det.resolution() {
        Err(Error::Domain {
            name: "j",
            value: j as f64,
            expected: "0..=N",
        })
    } else {
        Ok(())
    }
}

fn series<F: Fn(usize) -> f64>(mu: f64, det: &DetectorResponse, j: usize, weight: F) -> Series {
    let k = det.truncation().min(TRUNCATION);
    let value = distribution(mu, k)
        .map(|(i, p)| p * det.response(j, i) * weight(i))
        .sum();
    // every weight used here is at most 1
    Series {
        value,
        tail_bound: tail(mu, k as u32 + 1),
    }
}

/// `P_Aj = sum_i P(i) eta_{j|i}`.
pub fn trigger_prob(source: &SourceParams, det: &DetectorResponse, j: usize) -> Result<Series> {
    check_outcome(det, j)?;
    Ok(series(source.mu, det, j, |_| 1.0))
}

/// `Q_{mu,j} = sum_i P(i) eta_{j|i} Y_i`.
pub fn gain_j(
    source: &SourceParams,
    det: &DetectorResponse,
    channel: &ChannelParams,
    j: usize,
) -> Result<Series> {
    check_outcome(det, j)?;
    Ok(series(source.mu, det, j, |i| channel.yield_i(i as u32)))
}

/// `E_{mu,j} = sum_i P(i) eta_{j|i} Y_i e_i / Q_{mu,j}`.
pub fn qber_j(
    source: &SourceParams,
    det: &DetectorResponse,
    channel: &ChannelParams,
    j: usize,
) -> Result<f64> {
    let gain = gain_j(source, det, channel, j)?.value;
    if gain <= 0.0 {
        return Err(Error::UndefinedConditional("E_{mu,j}"));
    }
    let errors = series(source.mu, det, j, |i| channel.error_yield_i(i as u32)).value;
    Ok(errors / gain)
}

/// Statistics of every trigger group from the truncated series.
///
/// Groups with zero gain report a QBER of 0.
pub fn observe(
    source: &SourceParams,
    det: &DetectorResponse,
    channel: &ChannelParams,
) -> ObservedStatistics {
    let groups = (0..=det.resolution())
        .map(|j| {
            let trigger_prob = series(source.mu, det, j, |_| 1.0).value;
            let gain = series(source.mu, det, j, |i| channel.yield_i(i as u32)).value;
            let errors = series(source.mu, det, j, |i| channel.error_yield_i(i as u32)).value;
            GroupStats {
                gain,
                qber: if gain > 0.0 { errors / gain } else { 0.0 },
                trigger_prob,
            }
        })
        .collect();
    ObservedStatistics {
        mu: source.mu,
        groups,
    }
}

/// Closed-form statistics of triggered (`j = 1`) and non-triggered (`j = 0`)
/// events for a threshold trigger detector with dark counts neglected.
pub fn closed_form_threshold(
    source: &SourceParams,
    eta_a: f64,
    channel: &ChannelParams,
) -> ObservedStatistics {
    let mu = source.mu;
    let ChannelParams {
        eta,
        y0b,
        e_d,
        e_0,
    } = *channel;
    let silent = 1.0 / (1.0 + eta_a * mu);
    let both = 1.0 + (eta_a + eta - eta_a * eta) * mu;
    // differences of the printed terms, rearranged to avoid cancellation
    let q0 = (mu * eta * (1.0 - eta_a) + y0b * (1.0 + eta_a * mu)) * silent / both;
    let q1 = eta_a * mu * silent
        - (1.0 - y0b) * eta_a * (1.0 - eta) * mu / ((1.0 + eta * mu) * both);
    let eq0 = e_d * q0 + (e_0 - e_d) * y0b * silent;
    let eq1 = e_d * q1 + (e_0 - e_d) * eta_a * mu * y0b * silent;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    ObservedStatistics {
        mu,
        groups: vec![
            GroupStats {
                gain: q0,
                qber: ratio(eq0, q0),
                trigger_prob: silent,
            },
            GroupStats {
                gain: q1,
                qber: ratio(eq1, q1),
                trigger_prob: 1.0 - silent,
            },
        ],
    }
}

/// Exact vacuum and single-photon contributions for a threshold trigger.
pub fn true_decomposition(
    source: &SourceParams,
    eta_a: f64,
    channel: &ChannelParams,
) -> TrueDecomposition {
    let mu = source.mu;
    let y1 = channel.yield_i(1);
    let single = pn(mu, 1) * y1;
    TrueDecomposition {
        mu,
        // the vacuum never fires the trigger when dark counts are neglected
        q0: vec![pn(mu, 0) * channel.y0b, 0.0],
        q1: vec![single * (1.0 - eta_a), single * eta_a],
        e1: channel.error_i(1).unwrap_or(channel.e_0),
        y1,
    }
}

/// Statistics seen with a perfect photon-number-resolving trigger of
/// resolution `k_max`. Group `k_max` collects every `i >= k_max`.
pub fn pnr_observables(
    source: &SourceParams,
    channel: &ChannelParams,
    k_max: usize,
) -> Result<ObservedStatistics> {
    if k_max < 1 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let mu = source.mu;
    let mut groups: Vec<GroupStats> = (0..k_max)
        .map(|i| {
            let p = pn(mu, i as u32);
            GroupStats {
                gain: p * channel.yield_i(i as u32),
                qber: channel.error_i(i as u32).unwrap_or(0.0),
                trigger_prob: p,
            }
        })
        .collect();
    let (mut gain, mut errors) = (0.0, 0.0);
    for (i, p) in distribution(mu, TRUNCATION).skip(k_max) {
        gain += p * channel.yield_i(i as u32);
        errors += p * channel.error_yield_i(i as u32);
    }
    groups.push(GroupStats {
        gain,
        qber: if gain > 0.0 { errors / gain } else { 0.0 },
        trigger_prob: tail(mu, k_max as u32),
    });
    Ok(ObservedStatistics { mu, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pnr_response, threshold_response, ThresholdMode};

    const ETA_A: f64 = 0.145;

    fn baseline(loss_db: f64) -> ChannelParams {
        ChannelParams::from_loss(0.145, loss_db, 6.024e-6, 0.015).unwrap()
    }

    fn threshold() -> DetectorResponse {
        threshold_response(ETA_A, 0.0, ThresholdMode::Approximate).unwrap()
    }

    #[test]
    fn trigger_prob_anchors() {
        let det = threshold();
        let vac = SourceParams::new(0.0).unwrap();
        assert_eq!(trigger_prob(&vac, &det, 0).unwrap().value, 1.0);
        let src = SourceParams::new(0.4).unwrap();
        let pnr = pnr_response(6).unwrap();
        for j in 0..6 {
            let p = trigger_prob(&src, &pnr, j).unwrap().value;
            assert!((p - pn(0.4, j as u32)).abs() < 1e-15);
        }
        assert!(trigger_prob(&src, &det, 2).is_err());
        let t = trigger_prob(&src, &det, 1).unwrap();
        assert!(t.tail_bound < 1e-12);
    }

    #[test]
    fn gain_anchors() {
        let det = threshold();
        let ch = baseline(0.0);
        let vac = SourceParams::new(0.0).unwrap();
        assert!((gain_j(&vac, &det, &ch, 0).unwrap().value - ch.y0b).abs() < 1e-18);

        let ideal = ChannelParams::new(1.0, 0.0, 0.0).unwrap();
        let src = SourceParams::new(0.3).unwrap();
        let pnr = pnr_response(4).unwrap();
        let g = gain_j(&src, &pnr, &ideal, 1).unwrap().value;
        assert!((g - pn(0.3, 1)).abs() < 1e-16);

        let src = SourceParams::new(0.194).unwrap();
        let closed = closed_form_threshold(&src, ETA_A, &ch);
        let series = gain_j(&src, &det, &ch, 1).unwrap().value;
        assert!((series - closed.gain(1)).abs() < 1e-10);
    }

    #[test]
    fn qber_anchors() {
        let det = threshold();
        let src = SourceParams::new(0.3).unwrap();
        let clean = ChannelParams::new(0.2, 0.0, 0.02).unwrap();
        for j in 0..2 {
            assert!((qber_j(&src, &det, &clean, j).unwrap() - 0.02).abs() < 1e-14);
        }
        let dark = ChannelParams::new(0.0, 1e-5, 0.02).unwrap();
        for j in 0..2 {
            assert!((qber_j(&src, &det, &dark, j).unwrap() - 0.5).abs() < 1e-12);
        }
        let src = SourceParams::new(0.194).unwrap();
        let ch = baseline(20.0);
        let closed = closed_form_threshold(&src, ETA_A, &ch);
        assert!((qber_j(&src, &det, &ch, 1).unwrap() - closed.qber(1)).abs() < 1e-10);

        let nothing = ChannelParams::new(0.0, 0.0, 0.02).unwrap();
        assert!(qber_j(&src, &det, &nothing, 0).is_err());
    }

    #[test]
    fn closed_form_total_gain() {
        for &mu in &[0.01, 0.194, 0.52, 1.0] {
            for &loss in &[0.0, 13.0, 31.0] {
                let ch = baseline(loss);
                let src = SourceParams::new(mu).unwrap();
                let obs = closed_form_threshold(&src, ETA_A, &ch);
                let expected = 1.0 - (1.0 - ch.y0b) / (1.0 + ch.eta * mu);
                assert!((obs.total_gain() - expected).abs() < 1e-14);
            }
        }
        let vac = SourceParams::new(0.0).unwrap();
        let obs = closed_form_threshold(&vac, ETA_A, &baseline(0.0));
        assert!((obs.gain(0) - 6.024e-6).abs() < 1e-18);
        assert_eq!(obs.gain(1), 0.0);
    }

    #[test]
    fn decomposition() {
        let ch = baseline(0.0);
        let src = SourceParams::new(0.194).unwrap();
        let truth = true_decomposition(&src, ETA_A, &ch);
        assert!((truth.q1[0] + truth.q1[1] - pn(0.194, 1) * ch.yield_i(1)).abs() < 1e-16);
        // term i = 1 of the gain series
        let det = threshold();
        for j in 0..2 {
            let term = pn(0.194, 1) * det.response(j, 1) * ch.yield_i(1);
            assert!((truth.q1[j] - term).abs() < 1e-12);
        }
        let perfect = true_decomposition(&src, 1.0, &ch);
        assert_eq!(perfect.q1[0], 0.0);
        assert_eq!(truth.q0[1], 0.0);
    }

    #[test]
    fn pnr_anchors() {
        let ch = baseline(5.0);
        let src = SourceParams::new(0.6).unwrap();
        let obs = pnr_observables(&src, &ch, 5).unwrap();
        assert!((obs.gain(0) - pn(0.6, 0) * ch.y0b).abs() < 1e-18);
        assert!((obs.qber(0) - 0.5).abs() < 1e-15);
        let clean = ChannelParams::new(0.1, 0.0, 0.03).unwrap();
        let obs_clean = pnr_observables(&src, &clean, 5).unwrap();
        assert!((obs_clean.gain(1) - pn(0.6, 1) * 0.1).abs() < 1e-16);
        assert!((obs_clean.qber(1) - 0.03).abs() < 1e-15);

        let generic = observe(&src, &pnr_response(5).unwrap(), &ch);
        for j in 0..=5 {
            assert!((generic.gain(j) - obs.gain(j)).abs() < 1e-12);
            assert!((generic.qber(j) - obs.qber(j)).abs() < 1e-12);
            assert!((generic.groups[j].trigger_prob - obs.groups[j].trigger_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_closed_form_on_grid() {
        let det = threshold();
        for &mu in &[0.01, 0.0589, 0.194, 0.52, 1.0] {
            for &loss in &[0.0, 10.0, 20.0, 30.0, 40.0] {
                let ch = baseline(loss);
                let src = SourceParams::new(mu).unwrap();
                let closed = closed_form_threshold(&src, ETA_A, &ch);
                let series = observe(&src, &det, &ch);
                for j in 0..2 {
                    assert!((closed.gain(j) - series.gain(j)).abs() < 1e-10);
                    assert!((closed.error_count(j) - series.error_count(j)).abs() < 1e-10);
                    assert!(
                        (closed.groups[j].trigger_prob - series.groups[j].trigger_prob).abs()
                            < 1e-10
                    );
                }
            }
        }
    }
}
