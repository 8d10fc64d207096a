use serde::{Deserialize, Serialize};

use super::{EstimatorKind, SinglePhotonBounds};
use crate::error::{Error, Result};
use crate::model::{DetectorResponse, BACKGROUND_ERROR};
use crate::observables::ObservedStatistics;
use crate::photonics::{distribution, pn, tail, TRUNCATION};
use crate::simplex::{LinearProgram, Relation};

const MAX_TRUNCATION: usize = 60;
const TAIL_TARGET: f64 = 1e-12;

/// How the error variables `e_i Y_i` are tied to the yields `Y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuumCoupling {
    /// One program over `Y_i` and `e_i Y_i` with `e_0 Y_0 = Y_0/2` and
    /// `e_i Y_i <= Y_i`.
    #[default]
    Joint,
    /// Yields and error yields solved separately; the vacuum enters the yield
    /// program only through `P(0) eta_{j|0} Y_0 / 2 <= E_{mu,j} Q_{mu,j}`.
    Relaxed,
}

/// Admissible `[lower, upper]` intervals for the gain and error count of
/// every trigger group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupIntervals {
    pub mu: f64,
    pub gain: Vec<(f64, f64)>,
    pub error_count: Vec<(f64, f64)>,
}

impl GroupIntervals {
    /// Zero-width intervals at the observed values.
    pub fn exact(obs: &ObservedStatistics) -> Self {
        Self {
            mu: obs.mu,
            gain: obs.groups.iter().map(|g| (g.gain, g.gain)).collect(),
            error_count: obs.groups.iter().map(|g| (g.error_count(), g.error_count())).collect(),
        }
    }

    pub fn groups(&self) -> usize {
        self.gain.len()
    }
}

/// Smallest truncation `T >= N + 2` whose thermal tail beyond `T` is
/// negligible, capped at 60.
pub fn default_truncation(mu: f64, det: &DetectorResponse) -> usize {
    let floor = det.resolution() + 2;
    let mut t = floor;
    while t < MAX_TRUNCATION && tail(mu, t as u32 + 1) > TAIL_TARGET {
        t += 1;
    }
    t.max(floor)
}

/// Generalized passive-decoy bounds from exactly known statistics of every
/// trigger group, with joint yield / error-yield coupling.
pub fn estimate_passive_general(
    obs: &ObservedStatistics,
    det: &DetectorResponse,
    truncation: usize,
) -> Result<SinglePhotonBounds> {
    estimate_passive_bounded(
        &GroupIntervals::exact(obs),
        det,
        truncation,
        VacuumCoupling::Joint,
    )
}

/// Generalized passive-decoy bounds from interval-valued statistics.
///
/// Variables are `Y_i` and `e_i Y_i` for `i <= truncation`; photon numbers
/// above the truncation contribute at most their thermal tail to each group.
/// `Y_1` is minimized, `e_1 Y_1` maximized and `Y_0` minimized in three
/// separate programs.
pub fn estimate_passive_bounded(
    intervals: &GroupIntervals,
    det: &DetectorResponse,
    truncation: usize,
    coupling: VacuumCoupling,
) -> Result<SinglePhotonBounds> {
    let groups = intervals.groups();
    if groups != det.resolution() + 1 || intervals.error_count.len() != groups {
        return Err(Error::Config(format!(
            "statistics have {groups} groups but the detector reports {}",
            det.resolution() + 1
        )));
    }
    if truncation < det.resolution() + 2 {
        return Err(Error::Config(format!(
            "truncation {truncation} must be at least N + 2 = {}",
            det.resolution() + 2
        )));
    }
    let mu = intervals.mu;
    let t = truncation;
    let probs: Vec<f64> = (0..=t).map(|i| pn(mu, i as u32)).collect();
    // a[j][i] = P(i) eta_{j|i}
    let a: Vec<Vec<f64>> = (0..groups)
        .map(|j| (0..=t).map(|i| probs[i] * det.response(j, i)).collect())
        .collect();
    let tails: Vec<f64> = (0..groups)
        .map(|j| {
            distribution(mu, TRUNCATION)
                .skip(t + 1)
                .map(|(i, p)| p * det.response(j, i))
                .sum::<f64>()
                + tail(mu, TRUNCATION as u32 + 1)
        })
        .collect();

    let n = t + 1;
    let (y1, z1, y0) = match coupling {
        VacuumCoupling::Joint => {
            let mut lp = LinearProgram::new(2 * n);
            push_group_rows(&mut lp, &a, &tails, &intervals.gain, 0, "gain");
            push_group_rows(&mut lp, &a, &tails, &intervals.error_count, n, "error count");
            for i in 0..n {
                lp.push_terms(&[(i, 1.0)], Relation::Le, 1.0, format!("Y_{i} <= 1"));
                lp.push_terms(&[(n + i, 1.0), (i, -1.0)], Relation::Le, 0.0, format!("e_{i}Y_{i} <= Y_{i}"));
            }
            lp.push_terms(&[(n, 1.0), (0, -BACKGROUND_ERROR)], Relation::Eq, 0.0, "e_0 Y_0 = Y_0/2");
            let y1 = lp.minimize(&unit(2 * n, 1))?.objective;
            let z1 = lp.maximize(&unit(2 * n, n + 1))?.objective;
            let y0 = lp.minimize(&unit(2 * n, 0))?.objective;
            (y1, z1, y0)
        }
        VacuumCoupling::Relaxed => {
            let mut yields = LinearProgram::new(n);
            push_group_rows(&mut yields, &a, &tails, &intervals.gain, 0, "gain");
            for i in 0..n {
                yields.push_terms(&[(i, 1.0)], Relation::Le, 1.0, format!("Y_{i} <= 1"));
            }
            for j in 0..groups {
                let c = a[j][0] * BACKGROUND_ERROR;
                if c > 0.0 {
                    yields.push_terms(
                        &[(0, c)],
                        Relation::Le,
                        intervals.error_count[j].1,
                        format!("vacuum errors j={j}"),
                    );
                }
            }
            let mut errors = LinearProgram::new(n);
            push_group_rows(&mut errors, &a, &tails, &intervals.error_count, 0, "error count");
            for i in 0..n {
                errors.push_terms(&[(i, 1.0)], Relation::Le, 1.0, format!("e_{i}Y_{i} <= 1"));
            }
            let y1 = yields.minimize(&unit(n, 1))?.objective;
            let z1 = errors.maximize(&unit(n, 1))?.objective;
            let y0 = yields.minimize(&unit(n, 0))?.objective;
            (y1, z1, y0)
        }
    };

    let mut b = SinglePhotonBounds::new(EstimatorKind::PassiveGeneral, groups);
    for j in 0..groups {
        b.q0_lower[j] = (a[j][0] * y0).max(0.0);
    }
    if !(y1 > 0.0) {
        b.vacuous = vec![true; groups];
        return Ok(b);
    }
    let y1 = y1.min(1.0);
    b.y1_lower = y1;
    for j in 0..groups {
        b.q1_lower[j] = a[j][1] * y1;
    }
    let e1 = z1.max(0.0) / y1;
    if e1 > 1.0 {
        b.vacuous = vec![true; groups];
    } else {
        b.e1_upper = vec![e1; groups];
    }
    Ok(b)
}

fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    v
}

fn push_group_rows(
    lp: &mut LinearProgram,
    a: &[Vec<f64>],
    tails: &[f64],
    bounds: &[(f64, f64)],
    offset: usize,
    what: &str,
) {
    for (j, row) in a.iter().enumerate() {
        let terms: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (offset + i, c))
            .collect();
        let (lo, hi) = bounds[j];
        lp.push_terms(&terms, Relation::Le, hi, format!("{what} j={j} upper"));
        let floor = lo - tails[j];
        if floor > 0.0 {
            lp.push_terms(&terms, Relation::Ge, floor, format!("{what} j={j} lower"));
        }
    }
}
