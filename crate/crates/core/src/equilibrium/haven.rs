//! Equilibria when the carve-out is too small for country 2 to attract any
//! capital. Country 2 then only receives shifted profit, and its revenue is
//! flat in its own rate below the minimum, which produces a continuum of
//! equilibria.

use crate::equilibrium::gmt::{
    check_band, large_revenue_staying, large_revenue_undercutting, undercut_rate, EquilibriumBranch, GmtEquilibrium,
    Regime, TIE_TOLERANCE,
};
use crate::equilibrium::{best_response_no_gmt, nash_no_gmt, PreGmtEquilibrium};
use crate::error::{Error, Result};
use crate::firm::{GmtPolicy, TaxPair};
use crate::model::{phi_raw, Country, Economy};
use crate::numeric::bisect;
use crate::revenue::outcome;
use crate::thresholds::{investment_thresholds, limit_quantities, sigma_bounds};

const ENDPOINT_TOL: f64 = 1e-12;

/// Country 1's best revenue when country 2 taxes at `t2` above the minimum
/// and attracts no capital.
struct LargeValue<'a> {
    econ: &'a Economy,
    fixed_rate: f64,
    peak_rate: f64,
    peak: f64,
}

impl LargeValue<'_> {
    fn at(&self, t2: f64) -> Result<f64> {
        let e = self.econ;
        if t2 <= self.fixed_rate {
            let t1 = best_response_no_gmt(e, Country::One, t2)?;
            Ok(phi_raw(e.alpha1(), e.r(), e.mu(), t1, 0) - t1 * (t1 - t2) / e.delta())
        } else if t2 <= self.peak_rate {
            Ok(phi_raw(e.alpha1(), e.r(), e.mu(), t2, 0))
        } else {
            Ok(self.peak)
        }
    }
}

/// Continuum of equilibria for a carve-out at or below the haven floor.
pub fn nash_gmt_haven_case(econ: &Economy, policy: &GmtPolicy) -> Result<GmtEquilibrium> {
    let pre = nash_no_gmt(econ)?;
    haven_with_pre(econ, policy, &pre)
}

pub(crate) fn haven_with_pre(econ: &Economy, policy: &GmtPolicy, pre: &PreGmtEquilibrium) -> Result<GmtEquilibrium> {
    check_band(policy, pre)?;
    let t_m = policy.t_m;
    let bounds = sigma_bounds(econ, t_m, pre.t2())?;
    if policy.sigma > bounds.lower {
        return Err(Error::CarveTooLarge {
            sigma: policy.sigma,
            bound: bounds.lower,
        });
    }
    let t1_star = investment_thresholds(econ)[0];
    let undercut = [
        undercut_rate(&bounds, policy.sigma, Country::One),
        undercut_rate(&bounds, policy.sigma, Country::Two),
    ];
    let (t1_resp, r_stay) = large_revenue_staying(econ, t_m)?;
    let mut staying = None;
    let mut undercutting = None;
    let mut notes = Vec::new();
    let stay_branch = EquilibriumBranch {
        t1: t1_resp,
        t2_interval: [0.0, t_m],
    };
    let branches = if t_m <= t1_star {
        vec![stay_branch]
    } else {
        let r_under = large_revenue_undercutting(econ, &bounds, policy.sigma);
        staying = Some(r_stay);
        undercutting = Some(r_under);
        let limits = limit_quantities(econ)?;
        if (r_stay - r_under).abs() <= TIE_TOLERANCE {
            notes.push("country 1 is indifferent between staying above and undercutting".into());
            vec![
                stay_branch,
                EquilibriumBranch {
                    t1: undercut[0],
                    t2_interval: [0.0, t_m],
                },
            ]
        } else if r_stay > r_under {
            vec![stay_branch]
        } else if r_under >= limits.revenue_peak {
            vec![EquilibriumBranch {
                t1: undercut[0],
                t2_interval: [0.0, 1.0],
            }]
        } else {
            let peak_rate = limits.revenue_peak_rate;
            let fixed_rate = bisect(
                |x| best_response_no_gmt(econ, Country::One, x).map_or(f64::NAN, |t1| t1 - x),
                t_m,
                peak_rate,
                ENDPOINT_TOL,
                "rate equal to country 1's best response",
            )?;
            let value = LargeValue {
                econ,
                fixed_rate,
                peak_rate,
                peak: limits.revenue_peak,
            };
            let top = bisect(
                |t2| value.at(t2).map_or(f64::NAN, |v| v - r_under),
                t_m,
                peak_rate,
                ENDPOINT_TOL,
                "largest country 2 rate keeping undercutting optimal",
            )?;
            vec![EquilibriumBranch {
                t1: undercut[0],
                t2_interval: [0.0, top],
            }]
        }
    };
    let first = branches[0];
    let taxes = TaxPair {
        t1: first.t1,
        t2: 0.5 * (first.t2_interval[0] + first.t2_interval[1]),
    };
    let alternative = branches.get(1).map(|b| TaxPair {
        t1: b.t1,
        t2: 0.5 * (b.t2_interval[0] + b.t2_interval[1]),
    });
    let out = outcome(econ, Some(policy), &taxes)?;
    Ok(GmtEquilibrium {
        regime: Regime::HavenContinuum,
        policy: *policy,
        pre_taxes: pre.taxes,
        taxes,
        alternative,
        undercut_taxes: undercut,
        large_response: t1_resp,
        large_revenue_staying: staying,
        large_revenue_undercutting: undercutting,
        bounds,
        choice: out.choice,
        revenues: out.revenues,
        equilibrium_set: branches,
        notes,
    })
}
