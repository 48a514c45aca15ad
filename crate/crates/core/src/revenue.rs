//! Tax revenue of each country, split into the part raised on true profit,
//! the part raised on shifted profit and the carve-out loss.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::firm::{globe_incomes, FirmPlan, GmtPolicy, TaxPair};
use crate::model::{Country, Economy};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RevenueBreakdown {
    pub total: f64,
    /// Effective rate times the affiliate's true profit.
    pub true_profit_part: f64,
    /// Effective rate times the profit shifted in (negative when shifted out).
    pub shifted_part: f64,
    /// Revenue forgone through the carve-out.
    pub sbie_loss: f64,
    /// Domestic top-up tax on excess profit.
    pub topup_collected: f64,
}

fn breakdown(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    plan: &FirmPlan,
    i: Country,
) -> RevenueBreakdown {
    let t = taxes.get(i);
    let k = plan.k(i);
    let pi = globe_incomes(econ, plan)[i.index()];
    let true_profit = econ.true_profit(i, k);
    let shifted = i.inflow_sign() * plan.g;
    match policy {
        Some(p) if p.tops_up(t) => {
            let sbie_loss = (p.t_m - t) * p.sigma * k;
            RevenueBreakdown {
                total: p.t_m * pi - sbie_loss,
                true_profit_part: p.t_m * true_profit,
                shifted_part: p.t_m * shifted,
                sbie_loss,
                topup_collected: (p.t_m - t) * (pi - p.sigma * k),
            }
        }
        _ => RevenueBreakdown {
            total: t * pi,
            true_profit_part: t * true_profit,
            shifted_part: t * shifted,
            sbie_loss: 0.0,
            topup_collected: 0.0,
        },
    }
}

/// Revenues of both countries with an optional policy, for any plan.
pub fn revenues(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    plan: &FirmPlan,
) -> Result<[RevenueBreakdown; 2]> {
    taxes.validate()?;
    if let Some(p) = policy {
        p.validate()?;
    }
    Ok([
        breakdown(econ, policy, taxes, plan, Country::One),
        breakdown(econ, policy, taxes, plan, Country::Two),
    ])
}

/// Revenues `t_i pi_i` without a minimum tax.
pub fn revenues_no_gmt(econ: &Economy, taxes: &TaxPair, plan: &FirmPlan) -> Result<[RevenueBreakdown; 2]> {
    revenues(econ, None, taxes, plan)
}

/// Revenues with the domestic top-up collected by the host country.
pub fn revenues_gmt(
    econ: &Economy,
    policy: &GmtPolicy,
    taxes: &TaxPair,
    plan: &FirmPlan,
) -> Result<[RevenueBreakdown; 2]> {
    revenues(econ, Some(policy), taxes, plan)
}

/// Firm response and the resulting revenues at given taxes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub choice: crate::firm::FirmChoice,
    pub revenues: [RevenueBreakdown; 2],
}

impl Outcome {
    pub fn revenue(&self, i: Country) -> f64 {
        self.revenues[i.index()].total
    }
}

pub fn outcome(econ: &Economy, policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Result<Outcome> {
    let choice = crate::firm::firm_response(econ, policy, taxes)?;
    let revenues = revenues(econ, policy, taxes, &choice.plan())?;
    Ok(Outcome { choice, revenues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firm::firm_response;
    use crate::model::phi;
    use approx::assert_relative_eq;

    fn canonical() -> Economy {
        Economy::new(2.0, 1.8, 0.5, 0.5, 1.0).unwrap()
    }

    #[test]
    fn zero_rate_raises_nothing() {
        let e = canonical();
        let out = outcome(&e, None, &TaxPair::new(0.0, 0.3).unwrap()).unwrap();
        assert_eq!(out.revenues[0].total, 0.0);
    }

    #[test]
    fn interior_revenue_matches_true_profit_revenue_plus_shifting() {
        let e = canonical();
        for &(t1, t2) in &[(0.4, 0.3), (0.2, 0.5), (0.6, 0.55)] {
            let tx = TaxPair::new(t1, t2).unwrap();
            let out = outcome(&e, None, &tx).unwrap();
            let r1 = phi(&e, Country::One, t1, 0).unwrap() + t1 * (t2 - t1) / e.delta();
            let r2 = phi(&e, Country::Two, t2, 0).unwrap() + t2 * (t1 - t2) / e.delta();
            assert_relative_eq!(out.revenues[0].total, r1, epsilon = 1e-12);
            assert_relative_eq!(out.revenues[1].total, r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn at_the_minimum_revenue_is_unchanged() {
        let e = canonical();
        let tx = TaxPair::new(0.7, 0.55).unwrap();
        let p = GmtPolicy::new(0.55, 0.3).unwrap();
        let with = outcome(&e, Some(&p), &tx).unwrap();
        let without = outcome(&e, None, &tx).unwrap();
        assert_eq!(with.revenues, without.revenues);
    }

    #[test]
    fn no_carve_out_taxes_income_at_the_minimum() {
        let e = canonical();
        let tx = TaxPair::new(0.7, 0.2).unwrap();
        let p = GmtPolicy::new(0.55, 0.0).unwrap();
        let out = outcome(&e, Some(&p), &tx).unwrap();
        assert_eq!(out.revenues[1].total, 0.55 * out.choice.pi2);
    }

    #[test]
    fn both_forms_agree() {
        let e = canonical();
        let tx = TaxPair::new(0.7, 0.2).unwrap();
        let p = GmtPolicy::new(0.55, 0.4).unwrap();
        let c = firm_response(&e, Some(&p), &tx).unwrap();
        let rb = revenues_gmt(&e, &p, &tx, &c.plan()).unwrap();
        let b = rb[1];
        assert_relative_eq!(b.total, tx.t2 * c.pi2 + b.topup_collected, epsilon = 1e-12);
        assert_relative_eq!(
            b.total,
            b.true_profit_part + b.shifted_part - b.sbie_loss,
            epsilon = 1e-12
        );
    }
}
