//! Bounds on the vacuum and single-photon contributions to each trigger
//! group, from observed statistics.
//!
//! Every estimator returns [`SinglePhotonBounds`]. Lower bounds are floored
//! at 0 and error-rate upper bounds capped at 1; a group whose bound had to
//! be clamped is flagged vacuous so the key-rate stage assigns it no key.

use serde::{Deserialize, Serialize};

use crate::observables::{ObservedStatistics, TrueDecomposition};

mod ayki;
mod nondecoy;
mod passive;
mod weak;

pub use ayki::{ayki_q00_range, ayki_y1_background_free, estimate_ayki};
pub use nondecoy::estimate_nondecoy;
pub use passive::{
    default_truncation, estimate_passive_bounded, estimate_passive_general, GroupIntervals,
    VacuumCoupling,
};
pub use weak::{estimate_weak_decoy, KeyGroups, WeakDecoyConfig};

/// Which estimator produced a set of bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    NonDecoy,
    Infinite,
    WeakDecoy,
    Ayki,
    PassiveGeneral,
    /// Exact single-photon counts from a perfect photon-number-resolving
    /// trigger.
    PerfectPnr,
}

/// The unresolved vacuum contribution `Q_{0,0}` of the AYKI bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeVacuum {
    /// Admissible interval for `Q_{0,0}`.
    pub range: (f64, f64),
    pub eta_a: f64,
    /// Statistics the bounds were derived from.
    pub source: ObservedStatistics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePhotonBounds {
    pub estimator: EstimatorKind,
    /// Lower bound on `Q_{0,j}`.
    pub q0_lower: Vec<f64>,
    /// Lower bound on `Q_{1,j}`.
    pub q1_lower: Vec<f64>,
    /// Upper bound on `e_1` used for group `j`.
    pub e1_upper: Vec<f64>,
    /// Lower bound on the single-photon yield.
    pub y1_lower: f64,
    /// Groups whose bound was clamped and therefore carries no key.
    pub vacuous: Vec<bool>,
    pub free_vacuum: Option<FreeVacuum>,
}

impl SinglePhotonBounds {
    pub fn groups(&self) -> usize {
        self.q1_lower.len()
    }

    /// `e_1` upper bound of the triggered group when present, else group 0.
    pub fn e1_reported(&self) -> f64 {
        *self.e1_upper.get(1).unwrap_or(&self.e1_upper[0])
    }

    pub(crate) fn new(estimator: EstimatorKind, groups: usize) -> Self {
        Self {
            estimator,
            q0_lower: vec![0.0; groups],
            q1_lower: vec![0.0; groups],
            e1_upper: vec![1.0; groups],
            y1_lower: 0.0,
            vacuous: vec![false; groups],
            free_vacuum: None,
        }
    }
}

/// Clamps a single-photon lower bound and the matching error upper bound.
pub(crate) fn clamp_single(q1: f64, error_count: f64) -> (f64, f64, bool) {
    if !(q1 > 0.0) {
        return (0.0, 1.0, true);
    }
    let e1 = error_count / q1;
    if e1 > 1.0 {
        (q1, 1.0, true)
    } else {
        (q1, e1.max(0.0), false)
    }
}

/// Exact contributions from the forward model: the ceiling any decoy
/// protocol can reach.
pub fn estimate_infinite(truth: &TrueDecomposition) -> SinglePhotonBounds {
    let groups = truth.q1.len();
    let mut b = SinglePhotonBounds::new(EstimatorKind::Infinite, groups);
    b.q0_lower = truth.q0.clone();
    b.q1_lower = truth.q1.clone();
    b.e1_upper = vec![truth.e1; groups];
    b.y1_lower = truth.y1;
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelParams, SourceParams};
    use crate::observables::true_decomposition;

    #[test]
    fn infinite_is_passthrough() {
        let ch = ChannelParams::new(0.05, 0.0, 0.02).unwrap();
        let truth = true_decomposition(&SourceParams::new(0.5).unwrap(), 0.3, &ch);
        let b = estimate_infinite(&truth);
        assert_eq!(b.q1_lower, truth.q1);
        assert_eq!(b.q0_lower, truth.q0);
        assert_eq!(b.y1_lower, truth.y1);
        assert!(b.e1_upper.iter().all(|&e| (e - 0.02).abs() < 1e-15));
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_single(-1e-3, 1e-4), (0.0, 1.0, true));
        assert_eq!(clamp_single(1e-3, 2e-3), (1e-3, 1.0, true));
        let (q, e, v) = clamp_single(1e-2, 1e-4);
        assert_eq!((q, v), (1e-2, false));
        assert!((e - 1e-2).abs() < 1e-15);
    }
}
