//! Source, channel and trigger-detector models.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_probability, Error, Result};
use crate::photonics::TRUNCATION;

/// Error rate of background counts.
pub const BACKGROUND_ERROR: f64 = 0.5;

/// Single-mode PDC source, characterised by its mean photon-pair number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub mu: f64,
}

impl SourceParams {
    pub fn new(mu: f64) -> Result<Self> {
        check_non_negative("mu", mu)?;
        Ok(Self { mu })
    }
}

/// Bob-side channel: overall detection probability, background rate and
/// intrinsic misalignment error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta: f64,
    pub y0b: f64,
    pub e_d: f64,
    pub e_0: f64,
}

/// Transmittance of a `loss_db` attenuation.
pub fn transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

impl ChannelParams {
    pub fn new(eta: f64, y0b: f64, e_d: f64) -> Result<Self> {
        check_probability("eta", eta)?;
        check_probability("y0b", y0b)?;
        check_probability("e_d", e_d)?;
        Ok(Self {
            eta,
            y0b,
            e_d,
            e_0: BACKGROUND_ERROR,
        })
    }

    /// Channel with `eta = eta_bob * 10^(-loss_db/10)`.
    pub fn from_loss(eta_bob: f64, loss_db: f64, y0b: f64, e_d: f64) -> Result<Self> {
        check_probability("eta_bob", eta_bob)?;
        check_non_negative("loss_db", loss_db)?;
        Self::new(eta_bob * transmittance(loss_db), y0b, e_d)
    }

    /// Yield `Y_i = 1 - (1 - Y0B)(1 - eta)^i` of an `i`-photon state.
    pub fn yield_i(&self, i: u32) -> f64 {
        if i == 0 {
            return self.y0b;
        }
        let signal = if self.eta >= 1.0 {
            1.0
        } else {
            -(i as f64 * (-self.eta).ln_1p()).exp_m1()
        };
        self.y0b + (1.0 - self.y0b) * signal
    }

    /// Error-weighted yield `e_i Y_i = e_d Y_i + (e_0 - e_d) Y0B`.
    pub fn error_yield_i(&self, i: u32) -> f64 {
        self.e_d * self.yield_i(i) + (self.e_0 - self.e_d) * self.y0b
    }

    /// Error rate `e_i` of the `i`-photon channel.
    pub fn error_i(&self, i: u32) -> Result<f64> {
        let y = self.yield_i(i);
        if y <= 0.0 {
            return Err(Error::UndefinedConditional("e_i"));
        }
        Ok(self.e_d + (self.e_0 - self.e_d) * self.y0b / y)
    }
}

/// Free-function form of [`ChannelParams::yield_i`].
pub fn yield_i(channel: &ChannelParams, i: u32) -> f64 {
    channel.yield_i(i)
}

/// Free-function form of [`ChannelParams::error_i`].
pub fn error_i(channel: &ChannelParams, i: u32) -> Result<f64> {
    channel.error_i(i)
}

/// Whether the trigger detector's dark counts are kept in `eta_{0|i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `eta_{0|i} = (1 - eta_A)^i`.
    #[default]
    Approximate,
    /// `eta_{0|i} = (1 - Y0A)(1 - eta_A)^i`.
    Exact,
}

/// Conditional probabilities `eta_{j|i}` that an `i`-photon trigger mode is
/// reported as `j` photons, for `j = 0..=N` and `i = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorResponse {
    resolution: usize,
    // rows[i][j]
    rows: Vec<Vec<f64>>,
}

impl DetectorResponse {
    /// Builds a response from rows indexed by incoming photon number.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Config("detector response has no rows".into()));
        };
        if first.is_empty() {
            return Err(Error::Config("detector response has no outcomes".into()));
        }
        let width = first.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Config(format!("detector row {i} has wrong length")));
            }
            for &p in row {
                check_probability("eta_{j|i}", p)?;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "detector row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self {
            resolution: width - 1,
            rows,
        })
    }

    /// Largest reportable photon number `N`.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Photon-number truncation `K` of the table.
    pub fn truncation(&self) -> usize {
        self.rows.len() - 1
    }

    /// `eta_{j|i}`; zero for `j > N`. Photon numbers above `K` use row `K`.
    pub fn response(&self, j: usize, i: usize) -> f64 {
        let row = &self.rows[i.min(self.rows.len() - 1)];
        row.get(j).copied().unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i.min(self.rows.len() - 1)]
    }
}

/// Threshold (click / no-click) trigger detector with efficiency `eta_a`.
///
/// The default [`ThresholdMode::Approximate`] drops the dark-count rate `y0a`.
pub fn threshold_response(eta_a: f64, y0a: f64, mode: ThresholdMode) -> Result<DetectorResponse> {
    check_probability("eta_A", eta_a)?;
    check_probability("y0a", y0a)?;
    let dark = match mode {
        ThresholdMode::Approximate => 0.0,
        ThresholdMode::Exact => y0a,
    };
    let rows = (0..=TRUNCATION)
        .map(|i| {
            let silent = (1.0 - dark) * (1.0 - eta_a).powi(i as i32);
            vec![silent, 1.0 - silent]
        })
        .collect();
    DetectorResponse::from_rows(rows)
}

/// Perfect photon-number-resolving detector, `eta_{j|i} = delta_{ij}`.
/// Photon numbers above `k_max` are reported as `k_max`.
pub fn pnr_response(k_max: usize) -> Result<DetectorResponse> {
    if k_max < 1 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let rows = (0..=TRUNCATION.max(k_max))
        .map(|i| {
            let mut row = vec![0.0; k_max + 1];
            row[i.min(k_max)] = 1.0;
            row
        })
        .collect();
    DetectorResponse::from_rows(rows)
}

/// Single-outcome detector that never distinguishes anything (`N = 0`).
pub fn blind_response() -> DetectorResponse {
    DetectorResponse {
        resolution: 0,
        rows: vec![vec![1.0]; TRUNCATION + 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1(loss_db: f64) -> ChannelParams {
        ChannelParams::from_loss(0.145, loss_db, 6.024e-6, 0.015).unwrap()
    }

    #[test]
    fn yield_anchors() {
        let ch = table1(0.0);
        assert_eq!(ch.yield_i(0), 6.024e-6);
        let clean = ChannelParams::new(0.3, 0.0, 0.02).unwrap();
        assert!((clean.yield_i(1) - 0.3).abs() < 1e-15);
        // independent 40-digit evaluation
        assert!((ch.yield_i(3) - 0.374_977_390_158_883).abs() < 1e-14);
    }

    #[test]
    fn error_anchors() {
        let ch = table1(0.0);
        assert!((ch.error_i(0).unwrap() - 0.5).abs() < 1e-15);
        let clean = ChannelParams::new(0.3, 0.0, 0.02).unwrap();
        for i in 1..10 {
            assert!((clean.error_i(i).unwrap() - 0.02).abs() < 1e-15);
        }
        assert!((ch.error_i(1).unwrap() - 0.015_020_148_525_687_003).abs() < 1e-15);
        let dead = ChannelParams::new(0.0, 0.0, 0.01).unwrap();
        assert!(matches!(
            dead.error_i(2),
            Err(Error::UndefinedConditional(_))
        ));
    }

    #[test]
    fn yield_monotone_error_decreasing() {
        for loss in [0.0, 10.0, 30.0] {
            let ch = table1(loss);
            for i in 0..50 {
                assert!(ch.yield_i(i + 1) >= ch.yield_i(i));
                assert!(ch.yield_i(i + 1) <= 1.0);
                assert!(ch.error_i(i + 1).unwrap() <= ch.error_i(i).unwrap() + 1e-16);
                assert!(ch.error_i(i).unwrap() >= ch.e_d);
            }
        }
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelParams::new(1.2, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(0.1, -1e-3, 0.0).is_err());
        assert!(ChannelParams::new(0.1, 0.0, 1.5).is_err());
        let ch = ChannelParams::from_loss(0.145, 10.0, 0.0, 0.0).unwrap();
        assert!((ch.eta - 0.0145).abs() < 1e-15);
    }

    #[test]
    fn threshold_detector() {
        let perfect = threshold_response(1.0, 0.0, ThresholdMode::Approximate).unwrap();
        assert_eq!(perfect.resolution(), 1);
        assert_eq!(perfect.response(0, 0), 1.0);
        for i in 1..20 {
            assert_eq!(perfect.response(0, i), 0.0);
            assert_eq!(perfect.response(1, i), 1.0);
        }
        let blind = threshold_response(0.0, 0.0, ThresholdMode::Approximate).unwrap();
        for i in 0..20 {
            assert_eq!(blind.response(0, i), 1.0);
        }
        let det = threshold_response(0.145, 1e-4, ThresholdMode::Approximate).unwrap();
        assert!((det.response(0, 2) - 0.855f64.powi(2)).abs() < 1e-15);
        let exact = threshold_response(0.145, 1e-4, ThresholdMode::Exact).unwrap();
        assert!((exact.response(0, 2) - (1.0 - 1e-4) * 0.855f64.powi(2)).abs() < 1e-15);
        assert!((exact.response(1, 0) - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn pnr_detector() {
        let det = pnr_response(5).unwrap();
        assert_eq!(det.resolution(), 5);
        assert_eq!(det.response(3, 3), 1.0);
        assert_eq!(det.response(2, 3), 0.0);
        assert_eq!(det.response(5, 7), 1.0);
        assert!(pnr_response(0).is_err());
    }

    #[test]
    fn rows_normalized() {
        let dets = [
            threshold_response(0.145, 0.0, ThresholdMode::Approximate).unwrap(),
            threshold_response(0.6, 0.01, ThresholdMode::Exact).unwrap(),
            pnr_response(4).unwrap(),
            blind_response(),
        ];
        for det in &dets {
            for i in 0..=det.truncation() {
                let s: f64 = det.row(i).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn from_rows_rejects_bad_tables() {
        assert!(DetectorResponse::from_rows(vec![]).is_err());
        assert!(DetectorResponse::from_rows(vec![vec![0.5, 0.4]]).is_err());
        assert!(DetectorResponse::from_rows(vec![vec![1.0, 0.0], vec![1.0]]).is_err());
        assert!(DetectorResponse::from_rows(vec![vec![1.5, -0.5]]).is_err());
    }
}
