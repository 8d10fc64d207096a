//! Source-intensity optimization and the analytic optimal-mu conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photonics::{h2, EcModel};
use crate::keyrate::ProtocolParams;
use crate::protocol::{Protocol, Setup};
use crate::search::{bisect, grid_refine_max, mixed_grid};

pub const DEFAULT_INTERVAL: (f64, f64) = (1e-4, 1.0);
pub const GRID_POINTS: usize = 200;
const GRID_SPLIT: f64 = 0.1;
const MU_TOL: f64 = 1e-6;
const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub protocol: Protocol,
    pub mu_star: f64,
    pub rate_star: f64,
    /// Every grid point `(mu, rate)` evaluated before refinement.
    pub trace: Vec<(f64, f64)>,
}

/// Search interval actually used for `protocol`: the weak decoy needs
/// `mu > nu`, so its lower end is raised to `2 nu`.
pub fn effective_interval(setup: &Setup, protocol: Protocol, interval: (f64, f64)) -> Result<(f64, f64)> {
    let (mut lo, hi) = interval;
    if !(lo > 0.0 && hi > lo && hi <= 1.0) {
        return Err(Error::Config(format!(
            "mu interval [{lo}, {hi}] must satisfy 0 < lo < hi <= 1"
        )));
    }
    if protocol == Protocol::Weak {
        if let Some(weak) = setup.weak {
            lo = lo.max(2.0 * weak.nu);
            if lo >= hi {
                return Err(Error::Config(format!(
                    "weak decoy nu = {} leaves no room below mu <= {hi}",
                    weak.nu
                )));
            }
        }
    }
    Ok((lo, hi))
}

/// Maximizes the key rate over `mu` by a 200-point grid (log-spaced below
/// 0.1, linear above) and golden-section refinement around the best point.
/// Points where the rate cannot be evaluated count as zero.
pub fn optimize_mu(setup: &Setup, protocol: Protocol, loss_db: f64, interval: (f64, f64)) -> Result<OptimizationResult> {
    let (lo, hi) = effective_interval(setup, protocol, interval)?;
    // surface configuration problems instead of silently scoring zero
    setup.evaluate(protocol, hi, loss_db)?;
    let rate = |mu: f64| setup.rate(protocol, mu, loss_db).unwrap_or(0.0);
    let grid = mixed_grid(lo, hi, GRID_POINTS, GRID_SPLIT);
    let found = grid_refine_max(rate, &grid, MU_TOL);
    Ok(OptimizationResult {
        protocol,
        mu_star: found.x,
        rate_star: found.value,
        trace: found.grid,
    })
}

/// Approximate non-decoy rate
/// `q { -f(e_d) eta mu H2(e_d) + (eta mu - mu^2) [1 - H2(eta e_d / (eta - mu))] }`.
pub fn approx_rate_nondecoy(mu: f64, eta: f64, e_d: f64, params: &ProtocolParams) -> Result<f64> {
    if !(mu > 0.0 && mu < eta) {
        return Err(Error::Domain {
            name: "mu",
            value: mu,
            expected: "(0, eta)",
        });
    }
    let f = params.ec.eval(e_d);
    let e1 = (eta * e_d / (eta - mu)).min(0.5);
    Ok(params.q * (-f * eta * mu * h2(e_d) + (eta * mu - mu * mu) * (1.0 - h2(e1))))
}

/// Left-hand side of the non-decoy optimality condition in `x = mu/eta`:
/// `-f H2(e_d) + 1 - 2x + e_d log2(e_d/(1-x)) + (1 - e_d - 2x) log2(1 - e_d/(1-x))`.
pub fn nondecoy_condition(x: f64, e_d: f64, ec: &EcModel) -> f64 {
    let r = e_d / (1.0 - x);
    let first = if e_d > 0.0 { e_d * r.log2() } else { 0.0 };
    -ec.eval(e_d) * h2(e_d) + 1.0 - 2.0 * x + first + (1.0 - e_d - 2.0 * x) * (1.0 - r).log2()
}

/// Optimal `x = mu/eta` of the approximate non-decoy rate, by bisection on
/// `(0, 1/2]`.
pub fn solve_x_nondecoy(e_d: f64, ec: &EcModel) -> Result<f64> {
    if !(0.0..0.1).contains(&e_d) {
        return Err(Error::Domain {
            name: "e_d",
            value: e_d,
            expected: "[0, 0.1)",
        });
    }
    bisect(|x| nondecoy_condition(x, e_d, ec), 1e-12, 0.5, ROOT_TOL, "non-decoy optimal x")
}

/// Right-hand side `f H2(e_d) / (1 - H2(e_d))` of the decoy optimality condition.
fn decoy_rhs(e_d: f64, ec: &EcModel) -> f64 {
    let h = h2(e_d);
    ec.eval(e_d) * h / (1.0 - h)
}

/// `(1 - mu)/(1 + mu)^3 - f H2(e_d) / (1 - H2(e_d))`.
pub fn decoy_condition(mu: f64, e_d: f64, ec: &EcModel) -> f64 {
    (1.0 - mu) / (1.0 + mu).powi(3) - decoy_rhs(e_d, ec)
}

/// Optimal `mu` of the approximate infinite-decoy rate, by bisection on `(0, 1]`.
pub fn solve_mu_decoy(e_d: f64, ec: &EcModel) -> Result<f64> {
    if !(0.0..=0.5).contains(&e_d) {
        return Err(Error::Domain {
            name: "e_d",
            value: e_d,
            expected: "[0, 0.5]",
        });
    }
    let rhs = decoy_rhs(e_d, ec);
    if !(rhs < 1.0) {
        return Err(Error::NoPositiveRate(e_d));
    }
    bisect(|mu| decoy_condition(mu, e_d, ec), 0.0, 1.0, ROOT_TOL, "decoy optimal mu")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSweepRow {
    pub loss_db: f64,
    pub protocol: Protocol,
    pub mu_star: f64,
    pub rate_star: f64,
}

/// Optimal `mu` and rate for every `(loss, protocol)` pair, ordered by loss
/// then protocol name. Points are computed in parallel.
pub fn mu_sweep(setup: &Setup, protocols: &[Protocol], losses: &[f64], interval: (f64, f64)) -> Result<Vec<MuSweepRow>> {
    let mut jobs: Vec<(f64, Protocol)> = losses
        .iter()
        .flat_map(|&l| protocols.iter().map(move |&p| (l, p)))
        .collect();
    jobs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.name().cmp(b.1.name())));
    jobs.par_iter()
        .map(|&(loss_db, protocol)| {
            let r = optimize_mu(setup, protocol, loss_db, interval)?;
            Ok(MuSweepRow {
                loss_db,
                protocol,
                mu_star: r.mu_star,
                rate_star: r.rate_star,
            })
        })
        .collect()
}
