use serde::{Deserialize, Serialize};

use super::{EstimatorKind, SinglePhotonBounds};
use crate::error::{Error, Result};
use crate::observables::ObservedStatistics;

/// Trigger groups that contribute key in the weak-decoy protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyGroups {
    /// Triggered and non-triggered events, both bounded through `Y_1`.
    #[default]
    All,
    /// Triggered events only.
    TriggeredOnly,
}

/// Active weak-decoy settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakDecoyConfig {
    /// Decoy mean photon-pair number.
    pub nu: f64,
    /// Fraction of pump pulses sent at the signal intensity.
    pub signal_fraction: f64,
    #[serde(default)]
    pub key_groups: KeyGroups,
}

impl WeakDecoyConfig {
    pub fn validate(&self, mu: f64) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < mu) {
            return Err(Error::Config(format!(
                "weak decoy needs 0 < nu < mu (nu = {}, mu = {mu})",
                self.nu
            )));
        }
        if !(self.signal_fraction > 0.0 && self.signal_fraction < 1.0) {
            return Err(Error::Config(format!(
                "signal_fraction = {} is outside (0, 1)",
                self.signal_fraction
            )));
        }
        Ok(())
    }
}

/// Single-photon bounds from triggered events at a signal intensity `mu`
/// and one weak decoy intensity `nu`.
///
/// `Y_1 >= [ (mu/nu)(1+nu)^3 Q_{nu,1} - (nu/mu)(1+mu)^3 Q_{mu,1} ] / (eta_A (mu - nu))`
/// and `e_1` takes the smaller of the two single-intensity bounds. The
/// vacuum contribution is bounded by 0.
pub fn estimate_weak_decoy(
    obs_mu: &ObservedStatistics,
    obs_nu: &ObservedStatistics,
    mu: f64,
    nu: f64,
    eta_a: f64,
    key_groups: KeyGroups,
) -> Result<SinglePhotonBounds> {
    if !(nu > 0.0 && mu > nu) {
        return Err(Error::Config(format!(
            "weak decoy needs 0 < nu < mu (nu = {nu}, mu = {mu})"
        )));
    }
    if obs_mu.groups.len() < 2 || obs_nu.groups.len() < 2 {
        return Err(Error::Config("weak decoy needs triggered-group statistics".into()));
    }
    let groups = obs_mu.groups.len().min(2);
    let mut b = SinglePhotonBounds::new(EstimatorKind::WeakDecoy, groups);

    let y1 = ((mu / nu) * (1.0 + nu).powi(3) * obs_nu.gain(1)
        - (nu / mu) * (1.0 + mu).powi(3) * obs_mu.gain(1))
        / (eta_a * (mu - nu));
    if !(y1 > 0.0) {
        b.vacuous = vec![true; groups];
        return Ok(b);
    }
    let y1 = y1.min(1.0);
    let e1 = f64::min(
        (1.0 + mu).powi(2) / mu * obs_mu.error_count(1) / (eta_a * y1),
        (1.0 + nu).powi(2) / nu * obs_nu.error_count(1) / (eta_a * y1),
    );
    let (e1, capped) = if e1 > 1.0 { (1.0, true) } else { (e1.max(0.0), false) };

    let single = mu / (1.0 + mu).powi(2) * y1;
    b.y1_lower = y1;
    b.q1_lower[1] = single * eta_a;
    b.q1_lower[0] = match key_groups {
        KeyGroups::All => single * (1.0 - eta_a),
        KeyGroups::TriggeredOnly => 0.0,
    };
    b.e1_upper = vec![e1; groups];
    b.vacuous = vec![capped; groups];
    if key_groups == KeyGroups::TriggeredOnly {
        b.vacuous[0] = true;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelParams, SourceParams};
    use crate::observables::{closed_form_threshold, true_decomposition};

    const ETA_A: f64 = 0.145;

    fn run(ch: &ChannelParams, mu: f64, nu: f64) -> SinglePhotonBounds {
        let om = closed_form_threshold(&SourceParams::new(mu).unwrap(), ETA_A, ch);
        let on = closed_form_threshold(&SourceParams::new(nu).unwrap(), ETA_A, ch);
        estimate_weak_decoy(&om, &on, mu, nu, ETA_A, KeyGroups::All).unwrap()
    }

    #[test]
    fn converges_to_truth_as_nu_vanishes() {
        let ch = ChannelParams::from_loss(0.145, 10.0, 6.024e-6, 0.015).unwrap();
        let mu = 0.5;
        let truth = true_decomposition(&SourceParams::new(mu).unwrap(), ETA_A, &ch);
        let mut last_gap = f64::INFINITY;
        for nu in [1e-1, 1e-2, 1e-3, 1e-4] {
            let b = run(&ch, mu, nu);
            assert!(b.y1_lower <= truth.y1 * (1.0 + 1e-12));
            assert!(b.e1_upper[1] >= truth.e1 * (1.0 - 1e-12));
            let gap = truth.y1 - b.y1_lower;
            assert!(gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap / truth.y1 < 1e-3);
    }

    #[test]
    fn key_groups() {
        let ch = ChannelParams::from_loss(0.145, 0.0, 6.024e-6, 0.015).unwrap();
        let om = closed_form_threshold(&SourceParams::new(0.5).unwrap(), ETA_A, &ch);
        let on = closed_form_threshold(&SourceParams::new(0.05).unwrap(), ETA_A, &ch);
        let all = estimate_weak_decoy(&om, &on, 0.5, 0.05, ETA_A, KeyGroups::All).unwrap();
        let trig = estimate_weak_decoy(&om, &on, 0.5, 0.05, ETA_A, KeyGroups::TriggeredOnly).unwrap();
        assert_eq!(all.q1_lower[1], trig.q1_lower[1]);
        assert!(all.q1_lower[0] > 0.0);
        assert_eq!(trig.q1_lower[0], 0.0);
        assert!(trig.vacuous[0]);
    }

    #[test]
    fn rejects_bad_intensities() {
        let ch = ChannelParams::new(0.1, 1e-6, 0.01).unwrap();
        let o = closed_form_threshold(&SourceParams::new(0.3).unwrap(), ETA_A, &ch);
        assert!(estimate_weak_decoy(&o, &o, 0.3, 0.3, ETA_A, KeyGroups::All).is_err());
        assert!(estimate_weak_decoy(&o, &o, 0.3, 0.5, ETA_A, KeyGroups::All).is_err());
        assert!(estimate_weak_decoy(&o, &o, 0.3, 0.0, ETA_A, KeyGroups::All).is_err());
    }

    #[test]
    fn config_validation() {
        let c = WeakDecoyConfig {
            nu: 0.05,
            signal_fraction: 0.9,
            key_groups: KeyGroups::All,
        };
        assert!(c.validate(0.5).is_ok());
        assert!(c.validate(0.01).is_err());
        let bad = WeakDecoyConfig {
            signal_fraction: 1.0,
            ..c
        };
        assert!(bad.validate(0.5).is_err());
    }
}
