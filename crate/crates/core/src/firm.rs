//! The multinational's choice of capital in each affiliate and of the
//! amount of profit shifted between them.
//!
//! Capital follows the affiliate's first-order condition and shifting equates
//! the marginal concealment cost with the effective tax differential. Shifting
//! out of an affiliate cannot exceed its true profit. When that cap binds, the
//! source affiliate's capital is chosen on the cap boundary, where an extra
//! unit of profit is worth `1 - tau_dst - delta * g` instead of
//! `1 - tau_src`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Country, Economy};
use crate::numeric::bisect;

/// Statutory corporate tax rates of the two countries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxPair {
    pub t1: f64,
    pub t2: f64,
}

impl TaxPair {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        let p = TaxPair { t1, t2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t1", self.t1), ("t2", self.t2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::TaxOutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, i: Country) -> f64 {
        match i {
            Country::One => self.t1,
            Country::Two => self.t2,
        }
    }

    pub fn with(&self, i: Country, t: f64) -> TaxPair {
        match i {
            Country::One => TaxPair { t1: t, ..*self },
            Country::Two => TaxPair { t2: t, ..*self },
        }
    }
}

/// A global minimum tax: minimum rate and carve-out rate on substance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmtPolicy {
    pub t_m: f64,
    pub sigma: f64,
}

impl GmtPolicy {
    pub fn new(t_m: f64, sigma: f64) -> Result<Self> {
        let p = GmtPolicy { t_m, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_m > 0.0 && self.t_m < 1.0) {
            return Err(Error::InvalidPolicy(format!(
                "minimum rate t_m = {} must lie in (0, 1)",
                self.t_m
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidPolicy(format!(
                "carve-out rate sigma = {} must be finite and non-negative",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Whether a country taxing at `t` is topped up.
    pub fn tops_up(&self, t: f64) -> bool {
        t < self.t_m
    }
}

/// An arbitrary (not necessarily optimal) firm decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmPlan {
    pub k1: f64,
    pub k2: f64,
    pub g: f64,
}

impl FirmPlan {
    pub fn k(&self, i: Country) -> f64 {
        match i {
            Country::One => self.k1,
            Country::Two => self.k2,
        }
    }
}

/// The firm's optimal decision with derived incomes and profit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirmChoice {
    pub k1: f64,
    pub k2: f64,
    /// Profit shifted into country 2; negative values flow into country 1.
    pub g: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub e1: f64,
    pub e2: f64,
    pub profit: f64,
}

impl FirmChoice {
    pub fn plan(&self) -> FirmPlan {
        FirmPlan {
            k1: self.k1,
            k2: self.k2,
            g: self.g,
        }
    }
    pub fn k(&self, i: Country) -> f64 {
        self.plan().k(i)
    }
    pub fn pi(&self, i: Country) -> f64 {
        match i {
            Country::One => self.pi1,
            Country::Two => self.pi2,
        }
    }
    pub fn e(&self, i: Country) -> f64 {
        match i {
            Country::One => self.e1,
            Country::Two => self.e2,
        }
    }
}

/// Excess profits with their sign flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessProfit {
    pub e1: f64,
    pub e2: f64,
    pub e1_nonnegative: bool,
    pub e2_nonnegative: bool,
}

/// Rates actually borne at the margin and the per-unit carve-out benefit.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Wedges {
    pub tau: [f64; 2],
    pub sbie: [f64; 2],
}

pub(crate) fn wedges(policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Wedges {
    let mut w = Wedges {
        tau: [taxes.t1, taxes.t2],
        sbie: [0.0; 2],
    };
    if let Some(p) = policy {
        for i in 0..2 {
            if p.tops_up(w.tau[i]) {
                w.sbie[i] = (p.t_m - w.tau[i]) * p.sigma;
                w.tau[i] = p.t_m;
            }
        }
    }
    w
}

/// Effective rate of each country: `max(t_i, t_m)` under a policy.
pub fn effective_rates(policy: Option<&GmtPolicy>, taxes: &TaxPair) -> [f64; 2] {
    wedges(policy, taxes).tau
}

fn interior_capital(econ: &Economy, i: Country, tau: f64, sbie: f64) -> f64 {
    if tau >= 1.0 {
        return 0.0;
    }
    let a = econ.alpha(i);
    let r = econ.r();
    let mu = econ.mu();
    ((a * (1.0 - tau) - (1.0 - mu * tau) * r + sbie) / (1.0 - tau)).max(0.0)
}

/// Source capital when all of its true profit is shifted out.
fn capped_source_capital(econ: &Economy, src: Country, tau_dst: f64) -> Result<f64> {
    let a = econ.alpha(src);
    let mu_r = econ.mu() * econ.r();
    let wedge = econ.capital_wedge();
    let delta = econ.delta();
    let slope = |k: f64| {
        let p = econ.true_profit(src, k);
        -wedge + (a - k - mu_r) * (1.0 - tau_dst - delta * p)
    };
    if slope(0.0) <= 0.0 {
        return Ok(0.0);
    }
    bisect(slope, 0.0, a - mu_r, 0.0, "capital on the shifting cap")
}

fn check_inputs(policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Result<()> {
    taxes.validate()?;
    if let Some(p) = policy {
        p.validate()?;
    }
    Ok(())
}

fn solve(econ: &Economy, policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Result<FirmChoice> {
    check_inputs(policy, taxes)?;
    let w = wedges(policy, taxes);
    let mut k = [0.0; 2];
    for i in Country::BOTH {
        k[i.index()] = interior_capital(econ, i, w.tau[i.index()], w.sbie[i.index()]);
    }
    let gap = w.tau[0] - w.tau[1];
    let mut g = 0.0;
    if gap != 0.0 {
        let src = if gap > 0.0 { Country::One } else { Country::Two };
        let dst = src.other();
        let wanted = gap.abs() / econ.delta();
        let cap = econ.true_profit(src, k[src.index()]);
        let magnitude = if wanted <= cap {
            wanted
        } else {
            let ks = capped_source_capital(econ, src, w.tau[dst.index()])?;
            k[src.index()] = ks;
            econ.true_profit(src, ks).max(0.0)
        };
        g = magnitude * gap.signum();
    }
    let plan = FirmPlan { k1: k[0], k2: k[1], g };
    choice_from_plan(econ, policy, taxes, &plan)
}

pub(crate) fn choice_from_plan(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    plan: &FirmPlan,
) -> Result<FirmChoice> {
    let pi = globe_incomes(econ, plan);
    let sigma = policy.map_or(0.0, |p| p.sigma);
    Ok(FirmChoice {
        k1: plan.k1,
        k2: plan.k2,
        g: plan.g,
        pi1: pi[0],
        pi2: pi[1],
        e1: pi[0] - sigma * plan.k1,
        e2: pi[1] - sigma * plan.k2,
        profit: after_tax_profit(econ, policy, taxes, plan)?,
    })
}

/// Optimal firm decision without a minimum tax.
pub fn firm_response_no_gmt(econ: &Economy, taxes: &TaxPair) -> Result<FirmChoice> {
    solve(econ, None, taxes)
}

/// Optimal firm decision under a minimum tax with carve-out.
pub fn firm_response_gmt(econ: &Economy, policy: &GmtPolicy, taxes: &TaxPair) -> Result<FirmChoice> {
    solve(econ, Some(policy), taxes)
}

/// Optimal firm decision with an optional policy.
pub fn firm_response(econ: &Economy, policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Result<FirmChoice> {
    solve(econ, policy, taxes)
}

/// GloBE incomes `f_i(k_i) - mu r k_i` plus or minus the shifted profit.
pub fn globe_incomes(econ: &Economy, plan: &FirmPlan) -> [f64; 2] {
    [
        econ.true_profit(Country::One, plan.k1) - plan.g,
        econ.true_profit(Country::Two, plan.k2) + plan.g,
    ]
}

/// After-tax profit of an arbitrary plan.
///
/// Under a policy, a country taxing below the minimum adds the top-up
/// `(t_m - t_i)(pi_i - sigma k_i)`.
pub fn after_tax_profit(econ: &Economy, policy: Option<&GmtPolicy>, taxes: &TaxPair, plan: &FirmPlan) -> Result<f64> {
    for k in [plan.k1, plan.k2] {
        if k < 0.0 || k.is_nan() {
            return Err(Error::NegativeCapital(k));
        }
    }
    let pi = globe_incomes(econ, plan);
    let wedge = econ.capital_wedge();
    let mut total = -0.5 * econ.delta() * plan.g * plan.g;
    for i in Country::BOTH {
        let t = taxes.get(i);
        let p = pi[i.index()];
        let k = plan.k(i);
        total += (1.0 - t) * p - wedge * k;
        if let Some(pol) = policy {
            if pol.tops_up(t) {
                total -= (pol.t_m - t) * (p - pol.sigma * k);
            }
        }
    }
    Ok(total)
}

/// Excess profit `pi_i - sigma k_i` of each affiliate.
pub fn excess_profit(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    plan: &FirmPlan,
) -> Result<ExcessProfit> {
    check_inputs(policy, taxes)?;
    let pi = globe_incomes(econ, plan);
    let sigma = policy.map_or(0.0, |p| p.sigma);
    let e1 = pi[0] - sigma * plan.k1;
    let e2 = pi[1] - sigma * plan.k2;
    Ok(ExcessProfit {
        e1,
        e2,
        e1_nonnegative: e1 >= 0.0,
        e2_nonnegative: e2 >= 0.0,
    })
}
