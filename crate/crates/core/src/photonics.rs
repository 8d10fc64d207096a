//! Scalar primitives: binary entropy, error-correction inefficiency and the
//! thermal photon-pair distribution of a single-mode PDC source.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_probability, Error, Result};

/// Photon-number truncation used by every series evaluation.
///
/// The neglected tail is at most `(mu/(1+mu))^(K+1)`, below 1e-30 for `mu <= 2`.
pub const TRUNCATION: usize = 500;

/// Binary Shannon entropy `H2(p)` in bits, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(h2(p))
}

/// Unchecked binary entropy; callers guarantee `p` in `[0, 1]`.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Error-correction inefficiency `f(e) >= 1` relative to the Shannon limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EcModel {
    Constant { value: f64 },
    /// Piecewise-linear in the error rate, clamped at the end points.
    Table { points: Vec<(f64, f64)> },
}

impl Default for EcModel {
    fn default() -> Self {
        EcModel::Constant { value: 1.22 }
    }
}

impl EcModel {
    pub fn constant(value: f64) -> Result<Self> {
        let model = EcModel::Constant { value };
        model.validate()?;
        Ok(model)
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        let model = EcModel::Table { points };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EcModel::Constant { value } => {
                if !(*value >= 1.0 && value.is_finite()) {
                    return Err(Error::Domain {
                        name: "ec constant",
                        value: *value,
                        expected: "[1, inf)",
                    });
                }
            }
            EcModel::Table { points } => {
                if points.is_empty() {
                    return Err(Error::Config("ec table is empty".into()));
                }
                for (e, f) in points {
                    check_probability("ec table error rate", *e)?;
                    if !(*f >= 1.0 && f.is_finite()) {
                        return Err(Error::Domain {
                            name: "ec table efficiency",
                            value: *f,
                            expected: "[1, inf)",
                        });
                    }
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Config(
                        "ec table error rates must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `f(e)` for an error rate `e` in `[0, 1]`.
    pub fn efficiency(&self, e: f64) -> Result<f64> {
        check_probability("e", e)?;
        Ok(self.eval(e))
    }

    pub(crate) fn eval(&self, e: f64) -> f64 {
        match self {
            EcModel::Constant { value } => *value,
            EcModel::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if e <= first.0 {
                    return first.1;
                }
                if e >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|(x, _)| *x <= e);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (e - x0) / (x1 - x0)
            }
        }
    }
}

/// Free-function form of [`EcModel::efficiency`].
pub fn ec_efficiency(model: &EcModel, e: f64) -> Result<f64> {
    model.efficiency(e)
}

/// Probability `mu^n / (1+mu)^(n+1)` of emitting exactly `n` photon pairs.
pub fn thermal_pn(mu: f64, n: u32) -> Result<f64> {
    check_non_negative("mu", mu)?;
    Ok(pn(mu, n))
}

#[inline]
pub(crate) fn pn(mu: f64, n: u32) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ratio = mu / (1.0 + mu);
    ratio.powi(n as i32) / (1.0 + mu)
}

/// `sum_{n >= n0} thermal_pn(mu, n) = (mu/(1+mu))^n0`.
pub fn thermal_tail(mu: f64, n0: u32) -> Result<f64> {
    check_non_negative("mu", mu)?;
    Ok(tail(mu, n0))
}

#[inline]
pub(crate) fn tail(mu: f64, n0: u32) -> f64 {
    if n0 == 0 {
        1.0
    } else {
        (mu / (1.0 + mu)).powi(n0 as i32)
    }
}

/// Iterator over `(n, P(n))` for `n = 0..=k`, built by the recurrence
/// `P(n) = P(n-1) mu/(1+mu)`.
pub(crate) fn distribution(mu: f64, k: usize) -> impl Iterator<Item = (usize, f64)> {
    let ratio = mu / (1.0 + mu);
    let mut p = 1.0 / (1.0 + mu);
    (0..=k).map(move |n| {
        let current = p;
        p *= ratio;
        (n, current)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_anchors() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 40-digit evaluation of the defining formula
        let golden = 0.112_360_710_099_376_730_236_788_327_8;
        assert!((binary_entropy(0.015).unwrap() - golden).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn entropy_symmetry_and_concavity() {
        let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
        for &p in &grid {
            assert!((h2(p) - h2(1.0 - p)).abs() < 1e-14);
        }
        for w in grid.windows(3) {
            assert!(h2(w[1]) + 1e-15 >= 0.5 * (h2(w[0]) + h2(w[2])));
        }
    }

    #[test]
    fn ec_models() {
        let c = EcModel::constant(1.22).unwrap();
        assert_eq!(c.efficiency(0.03).unwrap(), 1.22);
        let shannon = EcModel::constant(1.0).unwrap();
        assert_eq!(shannon.efficiency(0.4).unwrap(), 1.0);
        let t = EcModel::table(vec![(0.01, 1.16), (0.05, 1.22)]).unwrap();
        assert!((t.efficiency(0.03).unwrap() - 1.19).abs() < 1e-12);
        assert_eq!(t.efficiency(0.0).unwrap(), 1.16);
        assert_eq!(t.efficiency(0.3).unwrap(), 1.22);
        assert!(t.efficiency(1.5).is_err());
        assert!(EcModel::constant(0.9).is_err());
        assert!(EcModel::table(vec![]).is_err());
        assert!(EcModel::table(vec![(0.05, 1.2), (0.01, 1.3)]).is_err());
        assert!(EcModel::table(vec![(0.01, 0.5)]).is_err());
    }

    #[test]
    fn thermal_anchors() {
        assert_eq!(thermal_pn(1.0, 0).unwrap(), 0.5);
        assert_eq!(thermal_pn(1.0, 1).unwrap(), 0.25);
        assert_eq!(thermal_pn(0.0, 0).unwrap(), 1.0);
        assert_eq!(thermal_pn(0.0, 3).unwrap(), 0.0);
        assert!(thermal_pn(-0.1, 0).is_err());

        // recurrence oracle P(n) = P(n-1) mu/(1+mu)
        let mu = 0.52;
        let mut p = 1.0 / (1.0 + mu);
        for _ in 0..2 {
            p *= mu / (1.0 + mu);
        }
        assert!((thermal_pn(mu, 2).unwrap() - p).abs() < 1e-16);
        assert!((thermal_pn(mu, 2).unwrap() - 0.076_997_375_710_745_006_6).abs() < 1e-16);
    }

    #[test]
    fn tail_anchors() {
        assert_eq!(thermal_tail(0.37, 0).unwrap(), 1.0);
        assert_eq!(thermal_tail(1.0, 1).unwrap(), 0.5);
        let mu = 0.194;
        let brute: f64 = (2..=500).map(|n| pn(mu, n)).sum();
        assert!((thermal_tail(mu, 2).unwrap() - brute).abs() < 1e-12);
        assert!(thermal_tail(-1.0, 2).is_err());
    }

    #[test]
    fn normalization_and_mean() {
        for &mu in &[0.0, 1e-4, 0.0589, 0.194, 0.52, 1.0, 2.0] {
            for &k in &[0usize, 3, 20, 100] {
                let head: f64 = distribution(mu, k).map(|(_, p)| p).sum();
                assert!((head + tail(mu, k as u32 + 1) - 1.0).abs() < 1e-12);
            }
            let mean: f64 = distribution(mu, TRUNCATION).map(|(n, p)| n as f64 * p).sum();
            assert!((mean - mu).abs() < 1e-9, "mu={mu} mean={mean}");
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for (n, p) in distribution(0.7, 60) {
            let direct = pn(0.7, n as u32);
            assert!((p - direct).abs() <= 1e-14 * direct.max(1e-300));
        }
    }
}
