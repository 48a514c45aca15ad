//! Brute-force checks that only evaluate profit and revenue functions.
//!
//! The firm oracle searches a `(k1, k2, g)` grid. Profit is additively
//! separable, `P(k1, k2, g) = P(k1, 0, 0) + P(0, k2, 0) + P(0, 0, g)`, and the
//! only coupling is feasibility of GloBE incomes (`pi1 >= 0`, `pi2 >= 0`), so
//! for each shifting value the best feasible capital on each axis is a prefix
//! maximum over capital points sorted by true profit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::GmtEquilibrium;
use crate::error::{Error, Result};
use crate::firm::{after_tax_profit, choice_from_plan, globe_incomes, FirmChoice, FirmPlan, GmtPolicy, TaxPair};
use crate::model::{Country, Economy};
use crate::numeric::linspace;
use crate::revenue::outcome;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Upper end of each capital axis; defaults to the output peak plus any carve-out subsidy.
    pub k_max: Option<[f64; 2]>,
    /// Points per capital axis.
    pub steps: usize,
    /// Points per tax axis in deviation sweeps.
    pub tax_steps: usize,
    /// Capital spacing; overrides `steps` when set.
    pub k_step: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            k_max: None,
            steps: 1001,
            tax_steps: 2001,
            k_step: None,
        }
    }
}

impl GridSpec {
    pub fn with_k_step(step: f64) -> Self {
        GridSpec {
            k_step: Some(step),
            ..GridSpec::default()
        }
    }

    pub fn with_tax_steps(tax_steps: usize) -> Self {
        GridSpec {
            tax_steps,
            ..GridSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 11 || self.tax_steps < 11 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 11 points per axis (steps = {}, tax_steps = {})",
                self.steps, self.tax_steps
            )));
        }
        if let Some(k) = self.k_max {
            if !(k[0] > 0.0 && k[1] > 0.0) {
                return Err(Error::InvalidArgument(format!("k_max must be positive, got {k:?}")));
            }
        }
        if let Some(h) = self.k_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("k_step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    fn k_axis(&self, econ: &Economy, policy: Option<&GmtPolicy>, i: Country) -> Vec<f64> {
        let top = match self.k_max {
            Some(k) => k[i.index()],
            None => {
                let extra = policy.map_or(0.0, |p| p.t_m * p.sigma / (1.0 - p.t_m));
                econ.alpha(i) + extra
            }
        };
        let n = match self.k_step {
            Some(h) => (top / h).ceil() as usize + 1,
            None => self.steps,
        };
        linspace(0.0, top, n)
    }
}

/// Best feasible single-axis profit for each lower bound on true profit.
struct AxisTable {
    /// Capital indices sorted by true profit, descending.
    profit_sorted: Vec<f64>,
    best_value: Vec<f64>,
    best_k: Vec<f64>,
}

impl AxisTable {
    fn new(ks: &[f64], profit: &[f64], value: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..ks.len()).collect();
        order.sort_by(|&a, &b| profit[b].total_cmp(&profit[a]).then(a.cmp(&b)));
        let mut best_value = Vec::with_capacity(order.len());
        let mut best_k = Vec::with_capacity(order.len());
        let mut cur: Option<(f64, usize)> = None;
        for &j in &order {
            cur = match cur {
                Some((v, idx)) if v > value[j] || (v == value[j] && idx < j) => Some((v, idx)),
                _ => Some((value[j], j)),
            };
            let (v, idx) = cur.unwrap();
            best_value.push(v);
            best_k.push(ks[idx]);
        }
        AxisTable {
            profit_sorted: order.iter().map(|&j| profit[j]).collect(),
            best_value,
            best_k,
        }
    }

    /// Best value among capital points whose true profit is at least `floor`.
    fn query(&self, floor: f64) -> Option<(f64, f64)> {
        let n = self.profit_sorted.partition_point(|&p| p >= floor);
        (n > 0).then(|| (self.best_value[n - 1], self.best_k[n - 1]))
    }
}

fn feasible(econ: &Economy, plan: &FirmPlan) -> bool {
    let pi = globe_incomes(econ, plan);
    plan.k1 >= 0.0 && plan.k2 >= 0.0 && pi[0] >= 0.0 && pi[1] >= 0.0
}

/// Grid argmax of after-tax profit with one half-step refinement pass.
pub fn brute_force_firm(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    taxes: &TaxPair,
    grid: &GridSpec,
) -> Result<FirmChoice> {
    grid.validate()?;
    taxes.validate()?;
    if let Some(p) = policy {
        p.validate()?;
    }
    let value = |k1: f64, k2: f64, g: f64| after_tax_profit(econ, policy, taxes, &FirmPlan { k1, k2, g });
    let mut tables = Vec::with_capacity(2);
    let mut k_steps = [0.0; 2];
    let mut cap: f64 = 0.0;
    let mut profits = Vec::with_capacity(2);
    for i in Country::BOTH {
        let ks = grid.k_axis(econ, policy, i);
        k_steps[i.index()] = ks[1] - ks[0];
        let profit: Vec<f64> = ks.iter().map(|&k| econ.true_profit(i, k)).collect();
        let vals = ks
            .iter()
            .map(|&k| match i {
                Country::One => value(k, 0.0, 0.0),
                Country::Two => value(0.0, k, 0.0),
            })
            .collect::<Result<Vec<f64>>>()?;
        cap = profit.iter().copied().fold(cap, f64::max);
        tables.push(AxisTable::new(&ks, &profit, &vals));
        profits.push(profit);
    }
    let n_g = 2 * grid.steps.max(ks_len(&tables)) - 1;
    let mut gs = linspace(-cap, cap, n_g);
    let g_step = gs[1] - gs[0];
    gs.extend(profits[0].iter().copied());
    gs.extend(profits[1].iter().map(|p| -p));

    let mut best: Option<(f64, FirmPlan)> = None;
    for &g in &gs {
        if g.abs() > cap {
            continue;
        }
        let (Some((v1, k1)), Some((v2, k2))) = (tables[0].query(g), tables[1].query(-g)) else {
            continue;
        };
        let total = v1 + v2 + value(0.0, 0.0, g)?;
        if best.map_or(true, |(b, _)| total > b) {
            best = Some((total, FirmPlan { k1, k2, g }));
        }
    }
    let (mut best_value, center) = best.expect("zero plan is always feasible");
    let mut plan = center;
    let (h1, h2, hg) = (0.5 * k_steps[0], 0.5 * k_steps[1], 0.5 * g_step);
    for d1 in [-h1, 0.0, h1] {
        for d2 in [-h2, 0.0, h2] {
            for dg in [-hg, 0.0, hg] {
                let cand = FirmPlan {
                    k1: center.k1 + d1,
                    k2: center.k2 + d2,
                    g: center.g + dg,
                };
                if !feasible(econ, &cand) {
                    continue;
                }
                let v = after_tax_profit(econ, policy, taxes, &cand)?;
                if v > best_value {
                    best_value = v;
                    plan = cand;
                }
            }
        }
    }
    choice_from_plan(econ, policy, taxes, &plan)
}

fn ks_len(tables: &[AxisTable]) -> usize {
    tables.iter().map(|t| t.profit_sorted.len()).max().unwrap_or(0)
}

/// Result of sweeping one country's rate with the rival fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSide {
    pub base_revenue: f64,
    pub max_gain: f64,
    pub best_deviation: f64,
    pub tolerance: f64,
}

impl DeviationSide {
    pub fn passed(&self) -> bool {
        self.max_gain < self.tolerance
    }
}

/// Relative tolerance on the revenue gain from a unilateral deviation.
pub const DEVIATION_TOLERANCE: f64 = 1e-8;

/// Sweeps `revenue` over an evenly spaced grid of `[0, 1]` plus the current rate.
///
/// Ties go to the lowest grid index.
pub fn deviation_sweep<F>(revenue: F, current: f64, tax_steps: usize) -> Result<DeviationSide>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let base = revenue(current)?;
    let grid = linspace(0.0, 1.0, tax_steps);
    let values = grid.par_iter().map(|&t| revenue(t)).collect::<Result<Vec<f64>>>()?;
    let mut best = (base, current);
    for (&t, &v) in grid.iter().zip(&values) {
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(DeviationSide {
        base_revenue: base,
        max_gain: best.0 - base,
        best_deviation: best.1,
        tolerance: DEVIATION_TOLERANCE * (1.0 + base.abs()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub candidate: TaxPair,
    pub max_gain_country1: f64,
    pub max_gain_country2: f64,
    /// Rate achieving each country's largest gain (the candidate rate when none improves).
    pub best_deviation: [f64; 2],
    pub base_revenue: [f64; 2],
    pub passed: bool,
}

impl DeviationReport {
    pub fn from_sides(candidate: TaxPair, sides: [DeviationSide; 2]) -> Self {
        DeviationReport {
            candidate,
            max_gain_country1: sides[0].max_gain,
            max_gain_country2: sides[1].max_gain,
            best_deviation: [sides[0].best_deviation, sides[1].best_deviation],
            base_revenue: [sides[0].base_revenue, sides[1].base_revenue],
            passed: sides[0].passed() && sides[1].passed(),
        }
    }

    pub fn max_gain(&self, i: Country) -> f64 {
        match i {
            Country::One => self.max_gain_country1,
            Country::Two => self.max_gain_country2,
        }
    }
}

/// Unilateral deviation check of a candidate tax pair.
///
/// Firm behaviour at each grid rate comes from the analytic firm response,
/// which the firm oracle checks separately.
pub fn verify_nash(
    econ: &Economy,
    policy: Option<&GmtPolicy>,
    candidate: &TaxPair,
    grid: &GridSpec,
) -> Result<DeviationReport> {
    grid.validate()?;
    candidate.validate()?;
    let mut sides = Vec::with_capacity(2);
    for i in Country::BOTH {
        let side = deviation_sweep(
            |t| Ok(outcome(econ, policy, &candidate.with(i, t))?.revenue(i)),
            candidate.get(i),
            grid.tax_steps,
        )?;
        sides.push(side);
    }
    Ok(DeviationReport::from_sides(*candidate, [sides[0], sides[1]]))
}

/// Tax pairs representing an equilibrium: the named pairs plus three
/// interior points of every interval of a continuum.
pub fn equilibrium_samples(eq: &GmtEquilibrium) -> Vec<TaxPair> {
    let mut out = eq.candidates();
    for branch in &eq.equilibrium_set {
        let [lo, hi] = branch.t2_interval;
        for frac in [0.25, 0.5, 0.75] {
            out.push(TaxPair {
                t1: branch.t1,
                t2: lo + frac * (hi - lo),
            });
        }
    }
    out
}

/// Deviation check of every sampled equilibrium pair.
pub fn verify_equilibrium(econ: &Economy, eq: &GmtEquilibrium, grid: &GridSpec) -> Result<Vec<DeviationReport>> {
    equilibrium_samples(eq)
        .iter()
        .map(|c| verify_nash(econ, Some(&eq.policy), c, grid))
        .collect()
}

fn eval_at<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::EvaluationFailed {
            x,
            reason: format!("value {y} is not finite"),
        })
    }
}

/// Central difference `(f(x + h) - f(x - h)) / 2h`.
pub fn finite_diff<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    Ok((eval_at(&mut f, x + h)? - eval_at(&mut f, x - h)?) / (2.0 * h))
}

/// Richardson extrapolation of central differences at `h` and `h / 2`.
pub fn richardson<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> Result<f64> {
    let coarse = finite_diff(&mut f, x, h)?;
    let fine = finite_diff(&mut f, x, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
