use serde::{Deserialize, Serialize};

use crate::equilibrium::PreGmtEquilibrium;
use crate::error::{Error, Result};
use crate::firm::{FirmChoice, GmtPolicy, TaxPair};
use crate::revenue::{outcome, Outcome, RevenueBreakdown};
use crate::thresholds::short_run_ceiling;

/// Outcome when a minimum tax arrives while both rates stay at their
/// pre-policy levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortRunReport {
    pub policy: GmtPolicy,
    pub taxes: TaxPair,
    pub choice: FirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    pub pre_choice: FirmChoice,
    pub pre_revenues: [RevenueBreakdown; 2],
    pub delta_revenue: [f64; 2],
    pub excess_profit_2: f64,
    pub excess_profit_2_positive: bool,
    pub carve_out_ceiling: f64,
    pub warnings: Vec<String>,
}

/// Firm response and revenues at the frozen pre-policy rates, without band checks.
pub fn short_run_at(econ: &crate::model::Economy, policy: &GmtPolicy, pre: &PreGmtEquilibrium) -> Result<Outcome> {
    outcome(econ, Some(policy), &pre.taxes)
}

pub fn short_run_outcome(
    econ: &crate::model::Economy,
    policy: &GmtPolicy,
    pre: &PreGmtEquilibrium,
) -> Result<ShortRunReport> {
    policy.validate()?;
    let (t1n, t2n) = (pre.t1(), pre.t2());
    if !(policy.t_m > t2n && policy.t_m < t1n) {
        return Err(Error::MinimumOutOfBand {
            t_m: policy.t_m,
            lo: t2n,
            hi: t1n,
        });
    }
    let out = short_run_at(econ, policy, pre)?;
    let ceiling = short_run_ceiling(econ, policy.t_m, t2n);
    let mut warnings = Vec::new();
    if policy.sigma > ceiling {
        warnings.push(format!(
            "GmtImmaterial: sigma = {} exceeds the short-run ceiling {ceiling}; \
             country 2's excess profit may be negative",
            policy.sigma
        ));
    }
    Ok(ShortRunReport {
        policy: *policy,
        taxes: pre.taxes,
        choice: out.choice,
        revenues: out.revenues,
        pre_choice: pre.choice,
        pre_revenues: pre.revenues,
        delta_revenue: [
            out.revenues[0].total - pre.revenues[0].total,
            out.revenues[1].total - pre.revenues[1].total,
        ],
        excess_profit_2: out.choice.e2,
        excess_profit_2_positive: out.choice.e2 > 0.0,
        carve_out_ceiling: ceiling,
        warnings,
    })
}
