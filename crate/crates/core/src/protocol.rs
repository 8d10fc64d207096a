//! Protocol definitions: one call from (protocol, mu, loss) to a key rate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_probability, Error, Result};
use crate::estimators::{
    ayki_q00_range, default_truncation, estimate_ayki, estimate_infinite, estimate_nondecoy,
    estimate_passive_bounded, estimate_weak_decoy, EstimatorKind, GroupIntervals,
    SinglePhotonBounds, VacuumCoupling, WeakDecoyConfig,
};
use crate::keyrate::{rate_pnr, rate_total, GroupRate, KeyRateReport, ProtocolParams};
use crate::model::{
    pnr_response, threshold_response, ChannelParams, DetectorResponse, SourceParams, ThresholdMode,
};
use crate::observables::{closed_form_threshold, observe, pnr_observables, true_decomposition, ObservedStatistics};
use crate::photonics::pn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    #[serde(rename = "nondecoy")]
    NonDecoy,
    Infinite,
    Weak,
    Ayki,
    Pnr,
    Passive,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::NonDecoy,
        Protocol::Infinite,
        Protocol::Weak,
        Protocol::Ayki,
        Protocol::Pnr,
        Protocol::Passive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::NonDecoy => "nondecoy",
            Protocol::Infinite => "infinite",
            Protocol::Weak => "weak",
            Protocol::Ayki => "ayki",
            Protocol::Pnr => "pnr",
            Protocol::Passive => "passive",
        }
    }

    /// Protocols that read a threshold trigger.
    pub fn needs_threshold(self) -> bool {
        matches!(
            self,
            Protocol::NonDecoy | Protocol::Infinite | Protocol::Weak | Protocol::Ayki
        )
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol '{s}'")))
    }
}

/// Fixed parts of the link between Alice's source and Bob's detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub eta_bob: f64,
    pub y0b: f64,
    pub e_d: f64,
    /// Loss in dB added to every channel loss.
    #[serde(default)]
    pub insertion_loss_db: f64,
}

impl Link {
    /// Parameters of a 144 km free-space experiment.
    pub fn baseline() -> Self {
        Self {
            eta_bob: 0.145,
            y0b: 6.024e-6,
            e_d: 0.015,
            insertion_loss_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta_bob", self.eta_bob)?;
        check_probability("y0b", self.y0b)?;
        check_probability("e_d", self.e_d)?;
        check_non_negative("insertion_loss_db", self.insertion_loss_db)
    }

    pub fn channel(&self, loss_db: f64) -> Result<ChannelParams> {
        ChannelParams::from_loss(
            self.eta_bob,
            loss_db + self.insertion_loss_db,
            self.y0b,
            self.e_d,
        )
    }
}

/// Alice's trigger detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriggerDetector {
    Threshold {
        eta_a: f64,
        #[serde(default)]
        y0a: f64,
        #[serde(default)]
        mode: ThresholdMode,
    },
    /// Perfect photon-number resolution up to `resolution` photons.
    Pnr { resolution: usize },
}

impl TriggerDetector {
    pub fn baseline() -> Self {
        TriggerDetector::Threshold {
            eta_a: 0.145,
            y0a: 0.0,
            mode: ThresholdMode::Approximate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TriggerDetector::Threshold { eta_a, y0a, .. } => {
                check_probability("eta_a", eta_a)?;
                check_probability("y0a", y0a)?;
                if eta_a == 0.0 {
                    return Err(Error::Config("eta_a must be positive".into()));
                }
                Ok(())
            }
            TriggerDetector::Pnr { resolution } => {
                if resolution < 1 {
                    return Err(Error::Config("pnr resolution must be at least 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn response(&self) -> Result<DetectorResponse> {
        match *self {
            TriggerDetector::Threshold { eta_a, y0a, mode } => threshold_response(eta_a, y0a, mode),
            TriggerDetector::Pnr { resolution } => pnr_response(resolution),
        }
    }

    fn threshold(&self, protocol: Protocol) -> Result<(f64, f64, ThresholdMode)> {
        match *self {
            TriggerDetector::Threshold { eta_a, y0a, mode } => Ok((eta_a, y0a, mode)),
            TriggerDetector::Pnr { .. } => Err(Error::Config(format!(
                "protocol '{protocol}' needs a threshold trigger detector"
            ))),
        }
    }
}

/// How the AYKI protocol bounds the single-photon contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AykiMode {
    /// Closed-form `Y_1` and `e_1` bounds, rate minimized over `Q_{0,0}`.
    #[default]
    ClosedForm,
    /// Linear program over the triggered and non-triggered statistics.
    Tight,
}

/// Everything needed to turn `(protocol, mu, loss)` into a key rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub link: Link,
    pub detector: TriggerDetector,
    pub params: ProtocolParams,
    pub weak: Option<WeakDecoyConfig>,
    pub ayki_mode: AykiMode,
    pub coupling: VacuumCoupling,
}

/// A key rate together with the statistics it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub protocol: Protocol,
    pub loss_db: f64,
    pub obs: ObservedStatistics,
    pub report: KeyRateReport,
}

impl Setup {
    /// Baseline link and detector with `q = 0.5` and `f = 1.22`.
    pub fn baseline() -> Self {
        Self {
            link: Link::baseline(),
            detector: TriggerDetector::baseline(),
            params: ProtocolParams::default(),
            weak: None,
            ayki_mode: AykiMode::default(),
            coupling: VacuumCoupling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.detector.validate()?;
        self.params.validate()
    }

    /// Threshold-trigger statistics at `mu`, from the closed form when
    /// detector dark counts are neglected.
    pub fn threshold_statistics(&self, protocol: Protocol, mu: f64, channel: &ChannelParams) -> Result<ObservedStatistics> {
        let (eta_a, y0a, mode) = self.detector.threshold(protocol)?;
        let src = SourceParams::new(mu)?;
        Ok(match mode {
            ThresholdMode::Approximate => closed_form_threshold(&src, eta_a, channel),
            ThresholdMode::Exact => observe(&src, &threshold_response(eta_a, y0a, mode)?, channel),
        })
    }

    pub fn rate(&self, protocol: Protocol, mu: f64, loss_db: f64) -> Result<f64> {
        Ok(self.evaluate(protocol, mu, loss_db)?.report.total)
    }

    pub fn evaluate(&self, protocol: Protocol, mu: f64, loss_db: f64) -> Result<Evaluation> {
        let channel = self.link.channel(loss_db)?;
        let src = SourceParams::new(mu)?;
        let (obs, report) = match protocol {
            Protocol::NonDecoy => {
                let (eta_a, ..) = self.detector.threshold(protocol)?;
                let obs = self.threshold_statistics(protocol, mu, &channel)?;
                let report = rate_total(&estimate_nondecoy(&obs, mu, eta_a), &obs, &self.params);
                (obs, report)
            }
            Protocol::Infinite => {
                let (eta_a, ..) = self.detector.threshold(protocol)?;
                let obs = self.threshold_statistics(protocol, mu, &channel)?;
                let bounds = estimate_infinite(&true_decomposition(&src, eta_a, &channel));
                let report = rate_total(&bounds, &obs, &self.params);
                (obs, report)
            }
            Protocol::Weak => {
                let (eta_a, ..) = self.detector.threshold(protocol)?;
                let weak = self.weak.ok_or_else(|| {
                    Error::Config("protocol 'weak' needs a weak_decoy block".into())
                })?;
                weak.validate(mu)?;
                let obs = self.threshold_statistics(protocol, mu, &channel)?;
                let obs_nu = self.threshold_statistics(protocol, weak.nu, &channel)?;
                let bounds = estimate_weak_decoy(&obs, &obs_nu, mu, weak.nu, eta_a, weak.key_groups)?;
                let report = rate_total(&bounds, &obs, &self.params);
                (obs, report)
            }
            Protocol::Ayki => {
                let (eta_a, ..) = self.detector.threshold(protocol)?;
                let obs = self.threshold_statistics(protocol, mu, &channel)?;
                let bounds = match self.ayki_mode {
                    AykiMode::ClosedForm => {
                        let (_, hi) = ayki_q00_range(&obs);
                        estimate_ayki(&obs, mu, eta_a, hi)?
                    }
                    AykiMode::Tight => {
                        let det = self.detector.response()?;
                        self.passive_bounds(&obs, &det)?
                    }
                };
                let report = rate_total(&bounds, &obs, &self.params);
                (obs, report)
            }
            Protocol::Pnr => {
                let obs = pnr_observables(&src, &channel, 1)?;
                let y1 = channel.yield_i(1);
                let e1 = channel.error_i(1).unwrap_or(channel.e_0);
                let q1 = pn(mu, 1) * y1;
                let mut bounds = SinglePhotonBounds::new(EstimatorKind::PerfectPnr, 2);
                bounds.q0_lower = vec![obs.gain(0), 0.0];
                bounds.q1_lower = vec![0.0, q1];
                bounds.e1_upper = vec![e1, e1];
                bounds.y1_lower = y1;
                let rate = rate_pnr(q1, e1, &self.params);
                let report = KeyRateReport {
                    estimator: EstimatorKind::PerfectPnr,
                    mu,
                    groups: vec![
                        GroupRate {
                            raw: 0.0,
                            clamped: 0.0,
                        },
                        GroupRate {
                            raw: rate,
                            clamped: rate,
                        },
                    ],
                    total: rate,
                    bounds,
                };
                (obs, report)
            }
            Protocol::Passive => {
                let det = self.detector.response()?;
                let obs = observe(&src, &det, &channel);
                let bounds = self.passive_bounds(&obs, &det)?;
                let report = rate_total(&bounds, &obs, &self.params);
                (obs, report)
            }
        };
        Ok(Evaluation {
            protocol,
            loss_db,
            obs,
            report,
        })
    }

    fn passive_bounds(&self, obs: &ObservedStatistics, det: &DetectorResponse) -> Result<SinglePhotonBounds> {
        let t = default_truncation(obs.mu, det);
        estimate_passive_bounded(&GroupIntervals::exact(obs), det, t, self.coupling)
    }
}
