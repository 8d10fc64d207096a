//! Finite-size statistical fluctuations: confidence intervals on observed
//! gains and error counts, propagated worst-case through the estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ayki_q00_range, estimate_ayki, estimate_infinite, estimate_weak_decoy, KeyGroups};
use crate::keyrate::{rate_total, KeyRateReport};
use crate::observables::{true_decomposition, GroupStats, ObservedStatistics};
use crate::protocol::{Protocol, Setup};
use crate::search::{golden_max, grid_refine_max, lin_grid, log_grid, mixed_grid};
use crate::model::SourceParams;

/// Which statistics enter the error-correction term of the key rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EcTerm {
    /// Central (measured) gains and error rates.
    #[default]
    Central,
    /// Upper gain and upper error-rate bounds.
    WorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub mu: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationParams {
    /// Total number of pump pulses.
    pub n_pulses: f64,
    /// Width of the confidence intervals in standard deviations.
    #[serde(default = "default_u_alpha")]
    pub u_alpha: f64,
    /// Fixed pulse allocation per intensity; empty lets the optimizer choose.
    #[serde(default)]
    pub allocation: Vec<Allocation>,
    #[serde(default)]
    pub ec_term: EcTerm,
}

fn default_u_alpha() -> f64 {
    10.0
}

impl FluctuationParams {
    pub fn new(n_pulses: f64, u_alpha: f64) -> Result<Self> {
        let fl = Self {
            n_pulses,
            u_alpha,
            allocation: Vec::new(),
            ec_term: EcTerm::Central,
        };
        fl.validate()?;
        Ok(fl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_pulses > 0.0 && self.n_pulses.is_finite()) {
            return Err(Error::Config(format!("n_pulses = {} must be positive", self.n_pulses)));
        }
        if !(self.u_alpha >= 0.0 && self.u_alpha.is_finite()) {
            return Err(Error::Config(format!("u_alpha = {} must be non-negative", self.u_alpha)));
        }
        if !self.allocation.is_empty() {
            if self.allocation.iter().any(|a| !(a.fraction > 0.0 && a.mu > 0.0)) {
                return Err(Error::Config("allocation entries need mu > 0 and fraction > 0".into()));
            }
            let sum: f64 = self.allocation.iter().map(|a| a.fraction).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("allocation fractions sum to {sum}, expected 1")));
            }
        }
        Ok(())
    }

    /// Pulses sent at `intensity`.
    pub fn pulses_at(&self, intensity: f64) -> Result<f64> {
        self.allocation
            .iter()
            .find(|a| (a.mu - intensity).abs() <= 1e-12 * intensity.max(1.0))
            .map(|a| a.fraction * self.n_pulses)
            .ok_or_else(|| Error::Config(format!("no pulses allocated to intensity {intensity}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub central: f64,
    pub upper: f64,
}

impl Interval {
    /// `central -/+ u sqrt(central / n)`, clamped to `[0, 1]`.
    pub fn gaussian(central: f64, n: f64, u: f64) -> Self {
        let half = u * (central.max(0.0) / n).sqrt();
        Self {
            lower: (central - half).clamp(0.0, 1.0),
            central,
            upper: (central + half).clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedStatistics {
    pub mu: f64,
    pub pulses: f64,
    pub gain: Vec<Interval>,
    /// Error counts `E_{mu,j} Q_{mu,j}`.
    pub error_count: Vec<Interval>,
}

impl BoundedStatistics {
    /// Statistics with every group taken at the chosen gain and error-count
    /// ends.
    fn pick(&self, gain: impl Fn(usize, &Interval) -> f64, errors: impl Fn(usize, &Interval) -> f64) -> ObservedStatistics {
        let groups = self
            .gain
            .iter()
            .zip(&self.error_count)
            .enumerate()
            .map(|(j, (g, e))| {
                let gain = gain(j, g);
                let count = errors(j, e);
                GroupStats {
                    gain,
                    qber: if gain > 0.0 { (count / gain).min(1.0) } else { 0.0 },
                    trigger_prob: 0.0,
                }
            })
            .collect();
        ObservedStatistics { mu: self.mu, groups }
    }
}

/// Confidence intervals for `obs` measured over `pulses` pump pulses.
pub fn fluctuate_pulses(obs: &ObservedStatistics, pulses: f64, u_alpha: f64) -> Result<BoundedStatistics> {
    if !(pulses > 0.0) {
        return Err(Error::Config("zero pulses allocated to an intensity".into()));
    }
    Ok(BoundedStatistics {
        mu: obs.mu,
        pulses,
        gain: obs.groups.iter().map(|g| Interval::gaussian(g.gain, pulses, u_alpha)).collect(),
        error_count: obs
            .groups
            .iter()
            .map(|g| Interval::gaussian(g.error_count(), pulses, u_alpha))
            .collect(),
    })
}

/// Confidence intervals for `obs` using the pulses allocated to `intensity`.
pub fn fluctuate(obs: &ObservedStatistics, fl: &FluctuationParams, intensity: f64) -> Result<BoundedStatistics> {
    fluctuate_pulses(obs, fl.pulses_at(intensity)?, fl.u_alpha)
}

/// Intensities and pulse split of one finite-size run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteChoice {
    pub mu: f64,
    /// Weak-decoy intensity; unused by the other protocols.
    pub nu: f64,
    /// Fraction of pulses at `mu`; 1 for protocols without a decoy.
    pub signal_fraction: f64,
}

impl FiniteChoice {
    pub fn single(mu: f64) -> Self {
        Self {
            mu,
            nu: 0.0,
            signal_fraction: 1.0,
        }
    }
}

fn ec_statistics(b: &BoundedStatistics, central: &ObservedStatistics, term: EcTerm) -> ObservedStatistics {
    match term {
        EcTerm::Central => central.clone(),
        EcTerm::WorstCase => b.pick(|_, g| g.upper, |_, e| e.upper),
    }
}

/// Key rate after worst-case propagation of the confidence intervals.
///
/// Infinite decoy keeps its exact single-photon contributions; AYKI and the
/// weak decoy feed the estimator whichever interval end weakens its bounds.
/// Weak-decoy key is scaled by the signal fraction.
pub fn rate_with_fluctuations(
    setup: &Setup,
    protocol: Protocol,
    loss_db: f64,
    fl: &FluctuationParams,
    choice: FiniteChoice,
) -> Result<KeyRateReport> {
    let channel = setup.link.channel(loss_db)?;
    let mu = choice.mu;
    match protocol {
        Protocol::Infinite | Protocol::Ayki => {
            let obs = setup.threshold_statistics(protocol, mu, &channel)?;
            let b = fluctuate_pulses(&obs, fl.n_pulses, fl.u_alpha)?;
            let ec = ec_statistics(&b, &obs, fl.ec_term);
            let bounds = if protocol == Protocol::Infinite {
                let eta_a = threshold_efficiency(setup, protocol)?;
                estimate_infinite(&true_decomposition(&SourceParams::new(mu)?, eta_a, &channel))
            } else {
                let eta_a = threshold_efficiency(setup, protocol)?;
                let worst = b.pick(
                    |j, g| if j == 0 { g.lower } else { g.upper },
                    |_, e| e.upper,
                );
                let (_, hi) = ayki_q00_range(&worst);
                estimate_ayki(&worst, mu, eta_a, hi)?
            };
            Ok(rate_total(&bounds, &ec, &setup.params))
        }
        Protocol::Weak => {
            let eta_a = threshold_efficiency(setup, protocol)?;
            let key_groups = setup.weak.map_or(KeyGroups::default(), |w| w.key_groups);
            let (nu, f) = (choice.nu, choice.signal_fraction);
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("signal_fraction = {f} is outside (0, 1)")));
            }
            let obs_mu = setup.threshold_statistics(protocol, mu, &channel)?;
            let obs_nu = setup.threshold_statistics(protocol, nu, &channel)?;
            let b_mu = fluctuate_pulses(&obs_mu, fl.n_pulses * f, fl.u_alpha)?;
            let b_nu = fluctuate_pulses(&obs_nu, fl.n_pulses * (1.0 - f), fl.u_alpha)?;
            let worst_mu = b_mu.pick(|_, g| g.upper, |_, e| e.upper);
            let worst_nu = b_nu.pick(|_, g| g.lower, |_, e| e.upper);
            let bounds = estimate_weak_decoy(&worst_mu, &worst_nu, mu, nu, eta_a, key_groups)?;
            let ec = ec_statistics(&b_mu, &obs_mu, fl.ec_term);
            let mut report = rate_total(&bounds, &ec, &setup.params);
            for g in &mut report.groups {
                g.raw *= f;
                g.clamped *= f;
            }
            report.total *= f;
            Ok(report)
        }
        other => Err(Error::Config(format!(
            "protocol '{other}' has no finite-size mode (use infinite, weak or ayki)"
        ))),
    }
}

fn threshold_efficiency(setup: &Setup, protocol: Protocol) -> Result<f64> {
    match setup.detector {
        crate::protocol::TriggerDetector::Threshold { eta_a, .. } => Ok(eta_a),
        _ => Err(Error::Config(format!(
            "protocol '{protocol}' needs a threshold trigger detector"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteOptimum {
    pub protocol: Protocol,
    pub loss_db: f64,
    pub choice: FiniteChoice,
    pub rate: f64,
}

const MU_GRID: usize = 60;
const WEAK_MU_GRID: usize = 30;
const NU_GRID: usize = 8;
const DESCENT_ROUNDS: usize = 4;
const TOL: f64 = 1e-6;

/// Maximizes the fluctuation-aware rate. Infinite decoy and AYKI search
/// `mu`; the weak decoy searches `(mu, nu, signal_fraction)` on a coarse grid
/// with `nu` in `[mu/100, mu/2]` and the fraction in `{0.5, ..., 0.95}`, then
/// refines by coordinate-wise golden-section search.
pub fn optimize_finite(
    setup: &Setup,
    protocol: Protocol,
    loss_db: f64,
    fl: &FluctuationParams,
    interval: (f64, f64),
) -> Result<FiniteOptimum> {
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi > lo && hi <= 1.0) {
        return Err(Error::Config(format!(
            "mu interval [{lo}, {hi}] must satisfy 0 < lo < hi <= 1"
        )));
    }
    let score = |c: FiniteChoice| {
        rate_with_fluctuations(setup, protocol, loss_db, fl, c).map_or(0.0, |r| r.total)
    };
    match protocol {
        Protocol::Infinite | Protocol::Ayki => {
            rate_with_fluctuations(setup, protocol, loss_db, fl, FiniteChoice::single(hi))?;
            let grid = mixed_grid(lo, hi, MU_GRID, 0.1);
            let found = grid_refine_max(|mu| score(FiniteChoice::single(mu)), &grid, TOL);
            Ok(FiniteOptimum {
                protocol,
                loss_db,
                choice: FiniteChoice::single(found.x),
                rate: found.value,
            })
        }
        Protocol::Weak => {
            let fractions = lin_grid(0.5, 0.95, 10);
            let mut best = (
                FiniteChoice {
                    mu: hi,
                    nu: hi / 4.0,
                    signal_fraction: 0.9,
                },
                f64::NEG_INFINITY,
            );
            for mu in mixed_grid(lo.max(2e-4), hi, WEAK_MU_GRID, 0.1) {
                for nu in log_grid(mu / 100.0, mu / 2.0, NU_GRID) {
                    for &signal_fraction in &fractions {
                        let c = FiniteChoice { mu, nu, signal_fraction };
                        let r = score(c);
                        if r > best.1 {
                            best = (c, r);
                        }
                    }
                }
            }
            let (mut c, mut r) = best;
            for _ in 0..DESCENT_ROUNDS {
                let (x, v) = golden_max(|mu| score(FiniteChoice { mu, ..c }), (2.0 * c.nu).max(lo), hi, TOL);
                if v > r {
                    c.mu = x;
                    r = v;
                }
                let (x, v) = golden_max(|nu| score(FiniteChoice { nu, ..c }), c.mu / 100.0, c.mu / 2.0, TOL * c.mu);
                if v > r {
                    c.nu = x;
                    r = v;
                }
                let (x, v) = golden_max(|signal_fraction| score(FiniteChoice { signal_fraction, ..c }), 0.5, 0.95, TOL);
                if v > r {
                    c.signal_fraction = x;
                    r = v;
                }
            }
            Ok(FiniteOptimum {
                protocol,
                loss_db,
                choice: c,
                rate: r.max(0.0),
            })
        }
        other => Err(Error::Config(format!(
            "protocol '{other}' has no finite-size mode (use infinite, weak or ayki)"
        ))),
    }
}

/// Optimized finite-size rates over a loss grid. For each protocol the rows
/// stop at the first loss where the rate reaches 0 (that row included).
pub fn fluctuation_sweep(
    setup: &Setup,
    protocols: &[Protocol],
    losses: &[f64],
    fl: &FluctuationParams,
    interval: (f64, f64),
) -> Result<Vec<FiniteOptimum>> {
    let mut protocols = protocols.to_vec();
    protocols.sort_by_key(|p| p.name());
    let mut rows = Vec::new();
    for protocol in protocols {
        let points: Vec<FiniteOptimum> = losses
            .par_iter()
            .map(|&loss| optimize_finite(setup, protocol, loss, fl, interval))
            .collect::<Result<_>>()?;
        for p in points {
            let stop = p.rate <= 0.0;
            rows.push(p);
            if stop {
                break;
            }
        }
    }
    rows.sort_by(|a, b| a.loss_db.total_cmp(&b.loss_db).then(a.protocol.name().cmp(b.protocol.name())));
    Ok(rows)
}

/// First loss at which the rate vanishes, linearly interpolated between the
/// last positive and first zero grid points.
pub fn cutoff_loss(points: &[(f64, f64)]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((l0, r0), (l1, r1)) = (w[0], w[1]);
        (r0 > 0.0 && r1 <= 0.0).then(|| l0 + (l1 - l0) * r0 / (r0 - r1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::WeakDecoyConfig;

    fn setup() -> Setup {
        let mut s = Setup::baseline();
        s.weak = Some(WeakDecoyConfig {
            nu: 0.05,
            signal_fraction: 0.9,
            key_groups: KeyGroups::All,
        });
        s
    }

    #[test]
    fn interval_arithmetic() {
        let i = Interval::gaussian(1e-3, 6e9, 10.0);
        let half = 10.0 * (1e-3f64 / 6e9).sqrt();
        assert!((i.upper - 1e-3 - half).abs() < 1e-18);
        assert!((1e-3 - i.lower - half).abs() < 1e-18);
        let z = Interval::gaussian(1e-3, 6e9, 0.0);
        assert_eq!((z.lower, z.upper), (1e-3, 1e-3));
        let wide = Interval::gaussian(1e-3, 10.0, 10.0);
        assert_eq!(wide.lower, 0.0);
    }

    #[test]
    fn width_scales_as_inverse_sqrt() {
        let a = Interval::gaussian(0.01, 1e8, 3.0);
        let b = Interval::gaussian(0.01, 4e8, 3.0);
        assert!(((a.upper - a.lower) / (b.upper - b.lower) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn allocation_lookup() {
        let mut fl = FluctuationParams::new(1e9, 5.0).unwrap();
        fl.allocation = vec![
            Allocation { mu: 0.5, fraction: 0.8 },
            Allocation { mu: 0.05, fraction: 0.2 },
        ];
        fl.validate().unwrap();
        assert_eq!(fl.pulses_at(0.05).unwrap(), 2e8);
        assert!(fl.pulses_at(0.3).is_err());
        fl.allocation[1].fraction = 0.3;
        assert!(fl.validate().is_err());
    }

    #[test]
    fn zero_width_matches_asymptotic() {
        let s = setup();
        let fl = FluctuationParams::new(6e9, 0.0).unwrap();
        for (p, mu) in [(Protocol::Infinite, 0.52), (Protocol::Ayki, 0.2)] {
            let finite = rate_with_fluctuations(&s, p, 5.0, &fl, FiniteChoice::single(mu)).unwrap().total;
            let asym = s.rate(p, mu, 5.0).unwrap();
            assert!((finite - asym).abs() <= 1e-15 * asym, "{p}");
        }
    }

    #[test]
    fn fluctuations_only_hurt() {
        let s = setup();
        let fl = FluctuationParams::new(6e9, 10.0).unwrap();
        for loss in [0.0, 15.0, 25.0] {
            let a = rate_with_fluctuations(&s, Protocol::Ayki, loss, &fl, FiniteChoice::single(0.2)).unwrap().total;
            assert!(a <= s.rate(Protocol::Ayki, 0.2, loss).unwrap());
            let c = FiniteChoice { mu: 0.5, nu: 0.05, signal_fraction: 0.9 };
            let w = rate_with_fluctuations(&s, Protocol::Weak, loss, &fl, c).unwrap().total;
            assert!(w <= 0.9 * s.rate(Protocol::Weak, 0.5, loss).unwrap());
        }
    }

    #[test]
    fn unsupported_protocol() {
        let fl = FluctuationParams::new(6e9, 10.0).unwrap();
        assert!(rate_with_fluctuations(&setup(), Protocol::Pnr, 0.0, &fl, FiniteChoice::single(0.5)).is_err());
    }

    #[test]
    fn cutoff_interpolation() {
        let pts = [(30.0, 2e-6), (31.0, 1e-6), (32.0, -1e-6)];
        assert_eq!(cutoff_loss(&pts), Some(31.5));
        assert_eq!(cutoff_loss(&pts[..2]), None);
    }
}
