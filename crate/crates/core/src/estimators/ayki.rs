use super::{EstimatorKind, FreeVacuum, SinglePhotonBounds};
use crate::error::{Error, Result};
use crate::model::BACKGROUND_ERROR;
use crate::observables::ObservedStatistics;

/// Admissible interval for the vacuum contribution `Q_{0,0}`:
/// `0 <= Q_{0,0} e_0 <= E_{mu,0} Q_{mu,0}`.
pub fn ayki_q00_range(obs: &ObservedStatistics) -> (f64, f64) {
    (0.0, obs.error_count(0) / BACKGROUND_ERROR)
}

/// Passive-decoy bounds from triggered and non-triggered statistics of a
/// threshold trigger, for an assumed vacuum contribution `q00`.
///
/// `Y_1 >= (1+mu)^2/mu [ (2-eta_A)/(1-eta_A) (Q_{mu,0} - Q_{0,0}) - (1-eta_A)/eta_A Q_{mu,1} ]`
/// with `e_1 <= E_{mu,1} Q_{mu,1} / Q_{1,1}`.
pub fn estimate_ayki(
    obs: &ObservedStatistics,
    mu: f64,
    eta_a: f64,
    q00: f64,
) -> Result<SinglePhotonBounds> {
    let range = ayki_q00_range(obs);
    if !(q00 >= range.0 && q00 <= range.1 * (1.0 + 1e-12)) {
        return Err(Error::Domain {
            name: "q00",
            value: q00,
            expected: "[0, 2 E_{mu,0} Q_{mu,0}]",
        });
    }
    if !(eta_a > 0.0 && eta_a < 1.0) {
        return Err(Error::Domain {
            name: "eta_A",
            value: eta_a,
            expected: "(0, 1)",
        });
    }
    if !(mu > 0.0) {
        return Err(Error::Domain {
            name: "mu",
            value: mu,
            expected: "(0, inf)",
        });
    }
    let mut b = SinglePhotonBounds::new(EstimatorKind::Ayki, 2);
    b.free_vacuum = Some(FreeVacuum {
        range,
        eta_a,
        source: obs.clone(),
    });
    b.q0_lower[0] = q00;

    let y1 = (1.0 + mu).powi(2) / mu
        * ((2.0 - eta_a) / (1.0 - eta_a) * (obs.gain(0) - q00)
            - (1.0 - eta_a) / eta_a * obs.gain(1));
    if !(y1 > 0.0) {
        b.vacuous = vec![true, true];
        return Ok(b);
    }
    let y1 = y1.min(1.0);
    let single = mu / (1.0 + mu).powi(2) * y1;
    b.y1_lower = y1;
    b.q1_lower = vec![single * (1.0 - eta_a), single * eta_a];
    let e1 = obs.error_count(1) / b.q1_lower[1];
    if e1 > 1.0 {
        b.e1_upper = vec![1.0, 1.0];
        b.vacuous = vec![true, true];
    } else {
        b.e1_upper = vec![e1.max(0.0); 2];
    }
    Ok(b)
}

/// Background-free, Eve-free value of the AYKI `Y_1` bound with `Q_{0,0} = 0`.
///
/// The `1/(1 - eta_A)` factor cancels against `Q_{mu,0}` analytically, so
/// this form stays finite at `eta_A = 1`, where the bound equals `eta`.
pub fn ayki_y1_background_free(mu: f64, eta_a: f64, eta: f64) -> f64 {
    let both = eta_a + eta - eta_a * eta;
    let q0_over_miss = mu * eta / ((1.0 + eta_a * mu) * (1.0 + both * mu));
    let q1 = 1.0 - 1.0 / (1.0 + eta_a * mu) - 1.0 / (1.0 + eta * mu) + 1.0 / (1.0 + both * mu);
    (1.0 + mu).powi(2) / mu * ((2.0 - eta_a) * q0_over_miss - (1.0 - eta_a) / eta_a * q1)
}
