use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::firm::{FirmChoice, TaxPair};
use crate::model::{phi_raw, Country, Economy};
use crate::numeric::bisect;
use crate::revenue::{outcome, RevenueBreakdown};

const STEP_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

/// Revenue-maximizing rate of country `i` when the other country taxes at `t_other`,
/// with no minimum tax.
pub fn best_response_no_gmt(econ: &Economy, i: Country, t_other: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t_other) {
        return Err(Error::TaxOutOfRange {
            name: "t_other",
            value: t_other,
            range: "[0, 1]",
        });
    }
    let (a, r, mu, delta) = (econ.alpha(i), econ.r(), econ.mu(), econ.delta());
    let hi = econ.corner_rate(i);
    bisect(
        |t| phi_raw(a, r, mu, t, 1) + (t_other - 2.0 * t) / delta,
        0.0,
        hi,
        0.0,
        "best-response first-order condition",
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreGmtEquilibrium {
    pub taxes: TaxPair,
    pub choice: FirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    pub iterations: usize,
    /// Sup-norm of the last best-response step.
    pub residual: f64,
    /// Sup-norm of every best-response step, in order.
    #[serde(default, skip_serializing)]
    pub residual_history: Vec<f64>,
}

impl PreGmtEquilibrium {
    pub fn t1(&self) -> f64 {
        self.taxes.t1
    }
    pub fn t2(&self) -> f64 {
        self.taxes.t2
    }
    pub fn revenue(&self, i: Country) -> f64 {
        self.revenues[i.index()].total
    }
}

/// Pre-policy equilibrium by simultaneous best-response iteration from `start`.
pub fn nash_no_gmt_from(econ: &Economy, start: TaxPair) -> Result<PreGmtEquilibrium> {
    start.validate()?;
    let mut t = start;
    let mut history = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        let next = TaxPair {
            t1: best_response_no_gmt(econ, Country::One, t.t2)?,
            t2: best_response_no_gmt(econ, Country::Two, t.t1)?,
        };
        let step = (next.t1 - t.t1).abs().max((next.t2 - t.t2).abs());
        history.push(step);
        t = next;
        if step < STEP_TOL {
            let out = outcome(econ, None, &t)?;
            return Ok(PreGmtEquilibrium {
                taxes: t,
                choice: out.choice,
                revenues: out.revenues,
                iterations: it,
                residual: step,
                residual_history: history,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "pre-policy best-response iteration".into(),
        iterations: MAX_ITERATIONS,
    })
}

/// Pre-policy equilibrium starting from zero taxes.
pub fn nash_no_gmt(econ: &Economy) -> Result<PreGmtEquilibrium> {
    nash_no_gmt_from(econ, TaxPair { t1: 0.0, t2: 0.0 })
}

/// Derivatives of the pre-policy equilibrium taxes with respect to the primitives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparativeStatics {
    pub dt1_dalpha1: f64,
    pub dt2_dalpha1: f64,
    pub dt1_dalpha2: f64,
    pub dt2_dalpha2: f64,
    pub dt1_ddelta: f64,
    pub dt2_ddelta: f64,
    pub jacobian_det: f64,
}

/// Implicit-function derivatives of the two first-order conditions.
pub fn comparative_statics_no_gmt(econ: &Economy) -> Result<ComparativeStatics> {
    let eq = nash_no_gmt(econ)?;
    Ok(statics_at(econ, &eq.taxes))
}

pub(crate) fn statics_at(econ: &Economy, t: &TaxPair) -> ComparativeStatics {
    let (r, mu, delta) = (econ.r(), econ.mu(), econ.delta());
    let curvature = |i: Country, ti: f64| -phi_raw(econ.alpha(i), r, mu, ti, 2);
    let c1 = curvature(Country::One, t.t1) + 2.0 / delta;
    let c2 = curvature(Country::Two, t.t2) + 2.0 / delta;
    let d1 = curvature(Country::One, t.t1);
    let d2 = curvature(Country::Two, t.t2);
    let det = c1 * c2 - 1.0 / (delta * delta);
    let m1 = econ.alpha1() - mu * r;
    let m2 = econ.alpha2() - mu * r;
    let d3 = delta * delta * delta;
    ComparativeStatics {
        dt1_dalpha1: m1 * c2 / det,
        dt2_dalpha1: m1 / (delta * det),
        dt1_dalpha2: m2 / (delta * det),
        dt2_dalpha2: m2 * c1 / det,
        dt1_ddelta: (d2 * (2.0 * t.t1 - t.t2) / (delta * delta) + 3.0 * t.t1 / d3) / det,
        dt2_ddelta: (d1 * (2.0 * t.t2 - t.t1) / (delta * delta) + 3.0 * t.t2 / d3) / det,
        jacobian_det: det,
    }
}
