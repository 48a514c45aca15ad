//! Extension with immobile labor and Cobb-Douglas technology
//! `f(k, l) = k^lambda l^beta`. Wages clear each country's labor market at
//! its endowment, payroll is fully deductible and the carve-out applies to
//! capital plus payroll at a common rate.
//!
//! With labor fixed at the endowment, the capital condition pins capital and
//! the labor condition pins the wage, so the firm response is closed form
//! except when the shifting cap binds.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{Regime, TIE_TOLERANCE};
use crate::error::{Error, Result, ValidationError, Violation};
use crate::firm::{wedges, GmtPolicy, TaxPair};
use crate::model::Country;
use crate::numeric::{bisect, bisect_log, golden_max, linspace};
use crate::oracle::{deviation_sweep, DeviationReport};
use crate::revenue::RevenueBreakdown;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaborEconomyRecord {
    pub lambda: f64,
    pub beta: f64,
    pub lbar1: f64,
    pub lbar2: f64,
    pub r: f64,
    pub mu: f64,
    pub delta: f64,
}

impl LaborEconomyRecord {
    pub fn validate(self) -> std::result::Result<LaborEconomy, ValidationError> {
        validate(self, false)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaborEconomyRecord", into = "LaborEconomyRecord")]
pub struct LaborEconomy {
    lambda: f64,
    beta: f64,
    lbar: [f64; 2],
    r: f64,
    mu: f64,
    delta: f64,
}

impl TryFrom<LaborEconomyRecord> for LaborEconomy {
    type Error = ValidationError;

    fn try_from(rec: LaborEconomyRecord) -> std::result::Result<Self, Self::Error> {
        rec.validate()
    }
}

impl From<LaborEconomy> for LaborEconomyRecord {
    fn from(e: LaborEconomy) -> Self {
        e.record()
    }
}

// Negated comparisons also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn validate(rec: LaborEconomyRecord, allow_zero_beta: bool) -> std::result::Result<LaborEconomy, ValidationError> {
    let mut v = Vec::new();
    for (name, x) in [
        ("lambda", rec.lambda),
        ("beta", rec.beta),
        ("lbar1", rec.lbar1),
        ("lbar2", rec.lbar2),
        ("r", rec.r),
        ("mu", rec.mu),
        ("delta", rec.delta),
    ] {
        if !x.is_finite() {
            v.push(Violation::NonFinite(name));
        }
    }
    if !v.is_empty() {
        return Err(ValidationError { violations: v });
    }
    if !(rec.lambda > 0.0 && rec.lambda < 1.0) {
        v.push(Violation::ViolatedLabor(format!(
            "lambda = {} is outside (0, 1)",
            rec.lambda
        )));
    }
    let beta_ok = if allow_zero_beta {
        rec.beta == 0.0
    } else {
        rec.beta > 0.0 && rec.beta < 1.0
    };
    if !beta_ok {
        v.push(Violation::ViolatedLabor(format!(
            "beta = {} is outside (0, 1)",
            rec.beta
        )));
    }
    if !(rec.lambda + rec.beta < 1.0) {
        v.push(Violation::ViolatedLabor(format!(
            "lambda + beta = {} must be below 1",
            rec.lambda + rec.beta
        )));
    }
    if !(rec.lbar1 > rec.lbar2 && rec.lbar2 > 0.0) {
        v.push(Violation::ViolatedLabor(format!(
            "endowments must satisfy lbar1 > lbar2 > 0, got {} and {}",
            rec.lbar1, rec.lbar2
        )));
    }
    if !(rec.r > 0.0) {
        v.push(Violation::ViolatedOrdering(format!("r = {} must be positive", rec.r)));
    }
    if !(0.0..1.0).contains(&rec.mu) {
        v.push(Violation::ViolatedDeductibility(rec.mu));
    }
    if !(rec.delta > 0.0) {
        v.push(Violation::NonpositiveDelta(rec.delta));
    }
    if v.is_empty() {
        Ok(LaborEconomy {
            lambda: rec.lambda,
            beta: rec.beta,
            lbar: [rec.lbar1, rec.lbar2],
            r: rec.r,
            mu: rec.mu,
            delta: rec.delta,
        })
    } else {
        Err(ValidationError { violations: v })
    }
}

impl LaborEconomy {
    pub fn new(lambda: f64, beta: f64, lbar1: f64, lbar2: f64, r: f64, mu: f64, delta: f64) -> Result<Self> {
        Ok(validate(
            LaborEconomyRecord {
                lambda,
                beta,
                lbar1,
                lbar2,
                r,
                mu,
                delta,
            },
            false,
        )?)
    }

    /// Economy without a labor share (`beta = 0`), used for reduction checks.
    pub fn capital_only(lambda: f64, lbar1: f64, lbar2: f64, r: f64, mu: f64, delta: f64) -> Result<Self> {
        Ok(validate(
            LaborEconomyRecord {
                lambda,
                beta: 0.0,
                lbar1,
                lbar2,
                r,
                mu,
                delta,
            },
            true,
        )?)
    }

    pub fn record(&self) -> LaborEconomyRecord {
        LaborEconomyRecord {
            lambda: self.lambda,
            beta: self.beta,
            lbar1: self.lbar[0],
            lbar2: self.lbar[1],
            r: self.r,
            mu: self.mu,
            delta: self.delta,
        }
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let mut rec = self.record();
        rec.delta = delta;
        Ok(validate(rec, self.beta == 0.0)?)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn lbar(&self, i: Country) -> f64 {
        self.lbar[i.index()]
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn output(&self, k: f64, l: f64) -> f64 {
        k.powf(self.lambda) * l.powf(self.beta)
    }

    pub fn marginal_capital(&self, k: f64, l: f64) -> f64 {
        self.lambda * k.powf(self.lambda - 1.0) * l.powf(self.beta)
    }

    pub fn marginal_labor(&self, k: f64, l: f64) -> f64 {
        self.beta * k.powf(self.lambda) * l.powf(self.beta - 1.0)
    }

    /// Upper end of the interval containing pre-policy equilibrium rates.
    pub fn rate_ceiling(&self) -> f64 {
        (1.0 - self.lambda) / (1.0 - self.mu * self.lambda)
    }

    /// Output minus deductible capital cost minus the wage bill at the endowment.
    pub fn true_profit(&self, i: Country, k: f64, w: f64) -> f64 {
        let l = self.lbar(i);
        self.output(k, l) - self.mu * self.r * k - w * l
    }
}

/// Closed form of the small country's short-run marginal-revenue indicator.
pub fn phi_labor(econ: &LaborEconomy, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::TaxOutOfRange {
            name: "t",
            value: t,
            range: "[0, 1)",
        });
    }
    Ok(phi_labor_raw(econ.lambda, econ.beta, econ.r, econ.mu, t))
}

pub(crate) fn phi_labor_raw(lambda: f64, beta: f64, r: f64, mu: f64, t: f64) -> f64 {
    let u = 1.0 - t;
    let v = 1.0 - mu * t;
    t * (1.0 - mu - beta * v) / ((1.0 - lambda) * u * v) - beta * r * v / (lambda * u * u) - 1.0
}

/// Ingredients of the marginal-revenue indicator, computed from the firm response.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiIngredients {
    /// Tax elasticity of capital, in absolute value (central difference).
    pub capital_elasticity: f64,
    /// `-lbar f_lk / (k f_kk)` at the solved point.
    pub substitution: f64,
    /// Payroll over capital.
    pub payroll_ratio: f64,
    /// The indicator rebuilt from the three ingredients.
    pub phi: f64,
}

/// Ingredients at rate `t` for country `i`, both countries taxing at `t`.
pub fn phi_ingredients(econ: &LaborEconomy, i: Country, t: f64) -> Result<PhiIngredients> {
    let at = |x: f64| labor_firm_response(econ, None, &TaxPair { t1: x, t2: x });
    let c = at(t)?;
    let h = 1e-5 * t.max(1e-3);
    let (up, down) = (at(t + h)?, at(t - h)?);
    let k = c.k(i);
    let capital_elasticity = -(up.k(i).ln() - down.k(i).ln()) / ((t + h).ln() - (t - h).ln());
    let l = econ.lbar(i);
    let (lam, beta) = (econ.lambda, econ.beta);
    let f_lk = lam * beta * k.powf(lam - 1.0) * l.powf(beta - 1.0);
    let f_kk = lam * (lam - 1.0) * k.powf(lam - 2.0) * l.powf(beta);
    let substitution = -l * f_lk / (k * f_kk);
    let payroll_ratio = c.w(i) * l / k;
    let phi = capital_elasticity - t / (1.0 - t) * substitution - payroll_ratio / (1.0 - t) - 1.0;
    Ok(PhiIngredients {
        capital_elasticity,
        substitution,
        payroll_ratio,
        phi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborFirmChoice {
    pub k1: f64,
    pub k2: f64,
    pub w1: f64,
    pub w2: f64,
    pub g: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub profit: f64,
    /// Largest relative gap between labor demand at the reported prices and the endowment.
    pub clearing_residual: f64,
}

impl LaborFirmChoice {
    pub fn k(&self, i: Country) -> f64 {
        match i {
            Country::One => self.k1,
            Country::Two => self.k2,
        }
    }
    pub fn w(&self, i: Country) -> f64 {
        match i {
            Country::One => self.w1,
            Country::Two => self.w2,
        }
    }
    pub fn pi(&self, i: Country) -> f64 {
        match i {
            Country::One => self.pi1,
            Country::Two => self.pi2,
        }
    }
}

/// Capital, wage and the user costs of capital and labor at which the
/// affiliate demands exactly its endowment.
#[derive(Clone, Copy, Debug)]
struct AffiliateSolution {
    k: f64,
    w: f64,
    capital_cost: f64,
    labor_cost: f64,
}

fn interior_affiliate(econ: &LaborEconomy, i: Country, tau: f64, sbie: f64) -> Result<AffiliateSolution> {
    if tau >= 1.0 {
        return Ok(AffiliateSolution {
            k: 0.0,
            w: 0.0,
            capital_cost: f64::INFINITY,
            labor_cost: 0.0,
        });
    }
    let (r, mu) = (econ.r, econ.mu);
    let capital_cost = mu * r + ((1.0 - mu) * r - sbie) / (1.0 - tau);
    let labor_share = 1.0 - tau - sbie;
    if !(capital_cost > 0.0 && labor_share > 0.0) {
        return Err(Error::InvalidPolicy(format!(
            "carve-out benefit {sbie} leaves a non-positive user cost in the labor economy"
        )));
    }
    let l = econ.lbar(i);
    let k = (econ.lambda * l.powf(econ.beta) / capital_cost).powf(1.0 / (1.0 - econ.lambda));
    let mpl = econ.marginal_labor(k, l);
    let w = mpl * (1.0 - tau) / labor_share;
    Ok(AffiliateSolution {
        k,
        w,
        capital_cost,
        labor_cost: mpl,
    })
}

/// Source affiliate whose whole true profit is shifted out; labor is paid its marginal product.
fn capped_affiliate(econ: &LaborEconomy, src: Country, tau_dst: f64) -> Result<AffiliateSolution> {
    let l = econ.lbar(src);
    let (r, mu, delta) = (econ.r, econ.mu, econ.delta);
    let profit = |k: f64| (1.0 - econ.beta) * econ.output(k, l) - mu * r * k;
    let slope = |k: f64| (econ.marginal_capital(k, l) - mu * r) * (1.0 - tau_dst - delta * profit(k)) - (1.0 - mu) * r;
    let mut hi = 1.0;
    let mut guard = 0;
    while slope(hi) >= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence {
                what: "upper bracket for capital on the shifting cap".into(),
                iterations: guard,
            });
        }
    }
    let mut lo = hi.min(1.0);
    guard = 0;
    while slope(lo) <= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 1000 {
            return Err(Error::NoConvergence {
                what: "lower bracket for capital on the shifting cap".into(),
                iterations: guard,
            });
        }
    }
    let k = bisect_log(slope, lo, hi, 0.0, "capital on the shifting cap")?;
    let w = econ.marginal_labor(k, l);
    let retained = 1.0 - tau_dst - delta * profit(k);
    Ok(AffiliateSolution {
        k,
        w,
        capital_cost: mu * r + (1.0 - mu) * r / retained,
        labor_cost: w,
    })
}

/// Labor demanded at the given user costs by the Cobb-Douglas technology.
fn labor_demand(econ: &LaborEconomy, capital_cost: f64, labor_cost: f64) -> f64 {
    let (lam, beta) = (econ.lambda, econ.beta);
    let scale = 1.0 - lam - beta;
    (lam / capital_cost).powf(lam / scale) * (beta / labor_cost).powf((1.0 - lam) / scale)
}

/// Plan of the firm with wages taken as given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborPlan {
    pub k1: f64,
    pub k2: f64,
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
}

/// After-tax profit of any plan at given wages, with the top-up on excess
/// profit net of the carve-out on capital and payroll.
pub fn labor_after_tax_profit(
    econ: &LaborEconomy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    plan: &LaborPlan,
    wages: [f64; 2],
) -> f64 {
    let mut total = -0.5 * econ.delta * plan.g * plan.g;
    for i in Country::BOTH {
        let (k, l) = match i {
            Country::One => (plan.k1, plan.l1),
            Country::Two => (plan.k2, plan.l2),
        };
        let w = wages[i.index()];
        let t = taxes.get(i);
        let pi = econ.output(k, l) - econ.mu * econ.r * k - w * l + i.inflow_sign() * plan.g;
        total += (1.0 - t) * pi - (1.0 - econ.mu) * econ.r * k;
        if let Some(p) = policy {
            if p.tops_up(t) {
                total -= (p.t_m - t) * (pi - p.sigma * (k + w * l));
            }
        }
    }
    total
}

/// Firm decision with market-clearing wages.
pub fn labor_firm_response(
    econ: &LaborEconomy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
) -> Result<LaborFirmChoice> {
    taxes.validate()?;
    if let Some(p) = policy {
        p.validate()?;
    }
    let wd = wedges(policy, taxes);
    let mut sol = [
        interior_affiliate(econ, Country::One, wd.tau[0], wd.sbie[0])?,
        interior_affiliate(econ, Country::Two, wd.tau[1], wd.sbie[1])?,
    ];
    let gap = wd.tau[0] - wd.tau[1];
    let mut g = 0.0;
    if gap != 0.0 {
        let src = if gap > 0.0 { Country::One } else { Country::Two };
        let dst = src.other();
        let wanted = gap.abs() / econ.delta;
        let s = sol[src.index()];
        let cap = econ.true_profit(src, s.k, s.w);
        let magnitude = if wanted <= cap {
            wanted
        } else {
            let capped = capped_affiliate(econ, src, wd.tau[dst.index()])?;
            sol[src.index()] = capped;
            econ.true_profit(src, capped.k, capped.w).max(0.0)
        };
        g = magnitude * gap.signum();
    }
    let mut residual: f64 = 0.0;
    for i in Country::BOTH {
        let s = sol[i.index()];
        if s.k > 0.0 {
            let l = labor_demand(econ, s.capital_cost, s.labor_cost);
            residual = residual.max((l - econ.lbar(i)).abs() / econ.lbar(i));
        }
    }
    let plan = LaborPlan {
        k1: sol[0].k,
        k2: sol[1].k,
        l1: econ.lbar[0],
        l2: econ.lbar[1],
        g,
    };
    let wages = [sol[0].w, sol[1].w];
    Ok(LaborFirmChoice {
        k1: plan.k1,
        k2: plan.k2,
        w1: wages[0],
        w2: wages[1],
        g,
        pi1: econ.true_profit(Country::One, plan.k1, wages[0]) - g,
        pi2: econ.true_profit(Country::Two, plan.k2, wages[1]) + g,
        profit: labor_after_tax_profit(econ, policy, taxes, &plan, wages),
        clearing_residual: if econ.beta > 0.0 { residual } else { 0.0 },
    })
}

/// Grid argmax of one affiliate's after-tax profit over `(k, l)` at a fixed
/// wage, ignoring shifting.
pub fn affiliate_grid_argmax(
    econ: &LaborEconomy,
    tau: f64,
    sbie: f64,
    wage: f64,
    k_axis: &[f64],
    l_axis: &[f64],
) -> (f64, f64) {
    let (r, mu) = (econ.r, econ.mu);
    let value = |k: f64, l: f64| {
        let p = econ.output(k, l) - mu * r * k - wage * l;
        (1.0 - tau) * p - (1.0 - mu) * r * k + sbie * (k + wage * l)
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &k in k_axis {
        for &l in l_axis {
            let v = value(k, l);
            if v > best.0 {
                best = (v, k, l);
            }
        }
    }
    (best.1, best.2)
}

fn breakdown(
    econ: &LaborEconomy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    c: &LaborFirmChoice,
    i: Country,
) -> RevenueBreakdown {
    let t = taxes.get(i);
    let k = c.k(i);
    let w = c.w(i);
    let true_profit = econ.true_profit(i, k, w);
    let pi = c.pi(i);
    let shifted = i.inflow_sign() * c.g;
    match policy {
        Some(p) if p.tops_up(t) => {
            let sbie_loss = (p.t_m - t) * p.sigma * (k + w * econ.lbar(i));
            RevenueBreakdown {
                total: p.t_m * pi - sbie_loss,
                true_profit_part: p.t_m * true_profit,
                shifted_part: p.t_m * shifted,
                sbie_loss,
                topup_collected: (p.t_m - t) * (pi - p.sigma * (k + w * econ.lbar(i))),
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

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborOutcome {
    pub choice: LaborFirmChoice,
    pub revenues: [RevenueBreakdown; 2],
}

impl LaborOutcome {
    pub fn revenue(&self, i: Country) -> f64 {
        self.revenues[i.index()].total
    }
}

pub fn labor_outcome(econ: &LaborEconomy, policy: Option<&GmtPolicy>, taxes: &TaxPair) -> Result<LaborOutcome> {
    let choice = labor_firm_response(econ, policy, taxes)?;
    Ok(LaborOutcome {
        choice,
        revenues: [
            breakdown(econ, policy, taxes, &choice, Country::One),
            breakdown(econ, policy, taxes, &choice, Country::Two),
        ],
    })
}

const SCAN_CELLS: usize = 400;
const DIFF_STEP: f64 = 1e-6;
/// Largest rate searched by best responses.
const RATE_TOP: f64 = 0.999;

/// Maximizer of `f` on `[lo, hi]`: a coarse scan picks the best cell, then
/// bisection on a central-difference derivative refines it, with
/// golden-section search as the fallback.
fn maximize<F>(f: F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let xs = linspace(lo, hi, SCAN_CELLS + 1);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (j, &x) in xs.iter().enumerate() {
        let v = f(x)?;
        if v > best.0 {
            best = (v, j);
        }
    }
    let j = best.1;
    let a = xs[j.saturating_sub(1)];
    let b = xs[(j + 1).min(SCAN_CELLS)];
    let slope = |x: f64| -> f64 {
        match (f(x + DIFF_STEP), f(x - DIFF_STEP)) {
            (Ok(u), Ok(d)) => (u - d) / (2.0 * DIFF_STEP),
            _ => f64::NAN,
        }
    };
    let interior = a - DIFF_STEP >= lo && b + DIFF_STEP <= hi;
    let refined = if interior && slope(a) > 0.0 && slope(b) < 0.0 {
        bisect(slope, a, b, 0.0, "revenue first-order condition").ok()
    } else {
        None
    };
    let x = match refined {
        Some(x) => x,
        None => golden_max(|x| f(x).unwrap_or(f64::NEG_INFINITY), a, b, 1e-12).0,
    };
    let v = f(x)?;
    Ok(if v >= best.0 { (x, v) } else { (xs[j], best.0) })
}

/// Revenue-maximizing rate of country `i` given the rival's rate, without a minimum tax.
pub fn labor_best_response(econ: &LaborEconomy, i: Country, t_other: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t_other) {
        return Err(Error::TaxOutOfRange {
            name: "t_other",
            value: t_other,
            range: "[0, 1]",
        });
    }
    let base = TaxPair {
        t1: t_other,
        t2: t_other,
    };
    let (x, _) = maximize(
        |t| Ok(labor_outcome(econ, None, &base.with(i, t))?.revenue(i)),
        0.0,
        RATE_TOP,
    )?;
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborPreEquilibrium {
    pub taxes: TaxPair,
    pub choice: LaborFirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    pub iterations: usize,
    pub residual: f64,
}

impl LaborPreEquilibrium {
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

const LABOR_STEP_TOL: f64 = 1e-10;
const LABOR_MAX_ITERATIONS: usize = 500;

/// Pre-policy labor equilibrium by simultaneous best-response iteration.
pub fn nash_labor_no_gmt(econ: &LaborEconomy) -> Result<LaborPreEquilibrium> {
    let mut t = TaxPair { t1: 0.0, t2: 0.0 };
    for it in 1..=LABOR_MAX_ITERATIONS {
        let next = TaxPair {
            t1: labor_best_response(econ, Country::One, t.t2)?,
            t2: labor_best_response(econ, Country::Two, t.t1)?,
        };
        let step = (next.t1 - t.t1).abs().max((next.t2 - t.t2).abs());
        t = next;
        if step < LABOR_STEP_TOL {
            let out = labor_outcome(econ, None, &t)?;
            return Ok(LaborPreEquilibrium {
                taxes: t,
                choice: out.choice,
                revenues: out.revenues,
                iterations: it,
                residual: step,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "labor best-response iteration".into(),
        iterations: LABOR_MAX_ITERATIONS,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborGmtEquilibrium {
    pub regime: Regime,
    pub policy: GmtPolicy,
    pub pre_taxes: TaxPair,
    pub taxes: TaxPair,
    pub alternative: Option<TaxPair>,
    pub phi_at_minimum: f64,
    /// Optimal rates below the minimum; the large country's entry is filled when compared.
    pub undercut_taxes: [Option<f64>; 2],
    pub large_response: f64,
    pub large_revenue_staying: Option<f64>,
    pub large_revenue_undercutting: Option<f64>,
    pub choice: LaborFirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    pub warnings: Vec<String>,
}

impl LaborGmtEquilibrium {
    pub fn revenue(&self, i: Country) -> f64 {
        self.revenues[i.index()].total
    }
    pub fn candidates(&self) -> Vec<TaxPair> {
        let mut v = vec![self.taxes];
        v.extend(self.alternative);
        v
    }
}

/// Best rate of country `i` within `[0, t_m]` under the policy, rival fixed.
fn labor_undercut(econ: &LaborEconomy, policy: &GmtPolicy, i: Country, rival: f64) -> Result<(f64, f64)> {
    let base = TaxPair { t1: rival, t2: rival };
    let f = |t: f64| Ok(labor_outcome(econ, Some(policy), &base.with(i, t))?.revenue(i));
    let (x, v) = maximize(f, 0.0, policy.t_m)?;
    let (xg, vg) = golden_max(|t| f(t).unwrap_or(f64::NEG_INFINITY), 0.0, policy.t_m, 1e-9);
    Ok(if vg > v { (xg, vg) } else { (x, v) })
}

/// Long-run labor equilibrium under a minimum tax.
pub fn nash_labor_gmt(econ: &LaborEconomy, policy: &GmtPolicy) -> Result<LaborGmtEquilibrium> {
    let pre = nash_labor_no_gmt(econ)?;
    nash_labor_gmt_with_pre(econ, policy, &pre)
}

pub fn nash_labor_gmt_with_pre(
    econ: &LaborEconomy,
    policy: &GmtPolicy,
    pre: &LaborPreEquilibrium,
) -> Result<LaborGmtEquilibrium> {
    policy.validate()?;
    let t_m = policy.t_m;
    if !(t_m > pre.t2() && t_m < pre.t1()) {
        return Err(Error::MinimumOutOfBand {
            t_m,
            lo: pre.t2(),
            hi: pre.t1(),
        });
    }
    let phi_m = phi_labor(econ, t_m)?;
    let t1_resp = labor_best_response(econ, Country::One, t_m)?;
    let mut undercut = [None, None];
    let mut staying = None;
    let mut undercutting = None;
    let mut alternative = None;
    let mut warnings = Vec::new();
    let (regime, taxes) = if phi_m <= 0.0 {
        (Regime::Binding, TaxPair { t1: t1_resp, t2: t_m })
    } else {
        let (t2u, _) = labor_undercut(econ, policy, Country::Two, t1_resp)?;
        undercut[1] = Some(t2u);
        let high = TaxPair { t1: t1_resp, t2: t2u };
        let r_stay = labor_outcome(econ, Some(policy), &high)?.revenue(Country::One);
        let (t1u, r_under) = labor_undercut(econ, policy, Country::One, t2u)?;
        undercut[0] = Some(t1u);
        staying = Some(r_stay);
        undercutting = Some(r_under);
        let low = TaxPair { t1: t1u, t2: t2u };
        if (r_stay - r_under).abs() <= TIE_TOLERANCE {
            alternative = Some(low);
            (Regime::Tie, high)
        } else if r_stay > r_under {
            (Regime::SmallUndercuts, high)
        } else {
            (Regime::BothUndercut, low)
        }
    };
    let out = labor_outcome(econ, Some(policy), &taxes)?;
    for i in Country::BOTH {
        let t = taxes.get(i);
        if policy.tops_up(t) {
            let e = out.choice.pi(i) - policy.sigma * (out.choice.k(i) + out.choice.w(i) * econ.lbar(i));
            if e < 0.0 {
                warnings.push(format!(
                    "excess profit of affiliate {} is negative ({e}); the carve-out exceeds the GloBE income",
                    i.index() + 1
                ));
            }
        }
    }
    Ok(LaborGmtEquilibrium {
        regime,
        policy: *policy,
        pre_taxes: pre.taxes,
        taxes,
        alternative,
        phi_at_minimum: phi_m,
        undercut_taxes: undercut,
        large_response: t1_resp,
        large_revenue_staying: staying,
        large_revenue_undercutting: undercutting,
        choice: out.choice,
        revenues: out.revenues,
        warnings,
    })
}

/// Unilateral deviation check of a labor tax pair.
pub fn verify_labor_nash(
    econ: &LaborEconomy,
    policy: Option<&GmtPolicy>,
    candidate: &TaxPair,
    tax_steps: usize,
) -> Result<DeviationReport> {
    candidate.validate()?;
    let mut sides = Vec::with_capacity(2);
    for i in Country::BOTH {
        sides.push(deviation_sweep(
            |t| Ok(labor_outcome(econ, policy, &candidate.with(i, t))?.revenue(i)),
            candidate.get(i),
            tax_steps,
        )?);
    }
    Ok(DeviationReport::from_sides(*candidate, [sides[0], sides[1]]))
}

/// Short-run outcome at the frozen pre-policy labor rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborShortRun {
    pub policy: GmtPolicy,
    pub taxes: TaxPair,
    pub choice: LaborFirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    pub delta_revenue: [f64; 2],
    pub phi_at_pre: f64,
}

pub fn labor_short_run(econ: &LaborEconomy, policy: &GmtPolicy, pre: &LaborPreEquilibrium) -> Result<LaborShortRun> {
    let out = labor_outcome(econ, Some(policy), &pre.taxes)?;
    Ok(LaborShortRun {
        policy: *policy,
        taxes: pre.taxes,
        choice: out.choice,
        revenues: out.revenues,
        delta_revenue: [
            out.revenue(Country::One) - pre.revenue(Country::One),
            out.revenue(Country::Two) - pre.revenue(Country::Two),
        ],
        phi_at_pre: phi_labor(econ, pre.t2())?,
    })
}
