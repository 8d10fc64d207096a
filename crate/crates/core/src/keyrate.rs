//! GLLP key rates per trigger group and in total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_ayki, EstimatorKind, SinglePhotonBounds};
use crate::observables::ObservedStatistics;
use crate::photonics::{h2, EcModel};
use crate::search::{golden_max, lin_grid};

const Q00_GRID: usize = 21;
const Q00_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Basis reconciliation factor.
    pub q: f64,
    #[serde(default)]
    pub ec: EcModel,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            q: 0.5,
            ec: EcModel::default(),
        }
    }
}

impl ProtocolParams {
    pub fn new(q: f64, ec: EcModel) -> Result<Self> {
        let p = Self { q, ec };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Domain {
                name: "q",
                value: self.q,
                expected: "(0, 1]",
            });
        }
        self.ec.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub raw: f64,
    /// `max(raw, 0)`, or 0 when the group's bounds were vacuous.
    pub clamped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub estimator: EstimatorKind,
    pub mu: f64,
    pub groups: Vec<GroupRate>,
    /// Sum of the clamped group rates, in bits per pump pulse.
    pub total: f64,
    pub bounds: SinglePhotonBounds,
}

/// `R_j = q { -f(E_j) Q_j H2(E_j) + Q_{1,j} [1 - H2(e_1)] + Q_{0,j} }`.
///
/// `e_1` enters the entropy capped at 1/2.
pub fn rate_group(qj: f64, ej: f64, q0j: f64, q1j: f64, e1: f64, params: &ProtocolParams) -> GroupRate {
    let ej = ej.clamp(0.0, 1.0);
    let raw = params.q
        * (-params.ec.eval(ej) * qj * h2(ej) + q1j * (1.0 - h2(e1.clamp(0.0, 0.5))) + q0j);
    GroupRate {
        raw,
        clamped: raw.max(0.0),
    }
}

/// Total rate over all trigger groups, negative groups counting as 0.
///
/// `obs` supplies the error-correction term. Bounds that leave the vacuum
/// contribution `Q_{0,0}` free are minimized over its admissible interval
/// first.
pub fn rate_total(
    bounds: &SinglePhotonBounds,
    obs: &ObservedStatistics,
    params: &ProtocolParams,
) -> KeyRateReport {
    if let Some(free) = &bounds.free_vacuum {
        let mu = free.source.mu;
        let eval = |q00: f64| {
            estimate_ayki(&free.source, mu, free.eta_a, q00)
                .map(|b| combine(&b, obs, params))
                .ok()
        };
        let score = |q00: f64| eval(q00).map_or(f64::NEG_INFINITY, |r| -r.total);
        let (lo, hi) = free.range;
        let mut best = (hi, score(hi));
        if hi > lo {
            let grid = lin_grid(lo, hi, Q00_GRID);
            let mut k = grid.len() - 1;
            let mut k_score = best.1;
            for (idx, &x) in grid.iter().enumerate() {
                let s = score(x);
                if s > k_score {
                    k = idx;
                    k_score = s;
                }
            }
            let a = grid[k.saturating_sub(1)];
            let b = grid[(k + 1).min(grid.len() - 1)];
            let (x, s) = golden_max(score, a, b, Q00_TOL);
            best = if s > k_score { (x, s) } else { (grid[k], k_score) };
        }
        if let Some(report) = eval(best.0) {
            return report;
        }
    }
    combine(bounds, obs, params)
}

fn combine(bounds: &SinglePhotonBounds, obs: &ObservedStatistics, params: &ProtocolParams) -> KeyRateReport {
    let groups: Vec<GroupRate> = (0..bounds.groups())
        .map(|j| {
            let mut r = rate_group(
                obs.gain(j),
                obs.qber(j),
                bounds.q0_lower[j],
                bounds.q1_lower[j],
                bounds.e1_upper[j],
                params,
            );
            if bounds.vacuous[j] {
                r.clamped = 0.0;
            }
            r
        })
        .collect();
    KeyRateReport {
        estimator: bounds.estimator,
        mu: obs.mu,
        total: groups.iter().map(|g| g.clamped).sum(),
        groups,
        bounds: bounds.clone(),
    }
}

/// Single-photon rate `q Q_1 [1 - f(e_1) H2(e_1) - H2(e_1)]`, clamped at 0.
pub fn rate_pnr(q1: f64, e1: f64, params: &ProtocolParams) -> f64 {
    let e1 = e1.clamp(0.0, 0.5);
    let h = h2(e1);
    (params.q * q1 * (1.0 - params.ec.eval(e1) * h - h)).max(0.0)
}
