//! Revenue effects of a minimum tax for both countries, in the short run
//! (rates frozen at the pre-policy equilibrium) and in the long run (rates
//! re-optimized).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    nash_gmt_with_pre, nash_no_gmt, short_run_at, short_run_outcome, GmtEquilibrium, PreGmtEquilibrium, Regime,
};
use crate::error::{Error, Result};
use crate::firm::{GmtPolicy, TaxPair};
use crate::model::{phi_raw, Country, Economy};
use crate::revenue::RevenueBreakdown;
use crate::thresholds::{investment_thresholds, short_run_ceiling, sigma_bounds};

/// Step above the pre-policy rate used for "marginally higher" minimum rates.
pub const MARGINAL_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    ShortRun,
    LongRun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    Gain,
    Loss,
    Zero,
}

impl SignClass {
    pub fn of(x: f64) -> SignClass {
        if x > 0.0 {
            SignClass::Gain
        } else if x < 0.0 {
            SignClass::Loss
        } else {
            SignClass::Zero
        }
    }
}

/// Derivative of country 2's short-run revenue in the minimum rate at the
/// pre-policy rate, and its sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect {
    pub derivative: f64,
    pub classification: SignClass,
    pub t2_pre: f64,
    pub investment_threshold: f64,
}

pub fn marginal_short_run_effect(econ: &Economy, pre: &PreGmtEquilibrium, sigma: f64) -> Result<MarginalEffect> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidPolicy(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    let (a2, r, mu) = (econ.alpha2(), econ.r(), econ.mu());
    let t = pre.t2();
    let u = 1.0 - t;
    let derivative = -sigma * (a2 * u * u - r * (1.0 - 2.0 * mu * t + mu * t * t)) / (u * u);
    Ok(MarginalEffect {
        derivative,
        classification: SignClass::of(derivative),
        t2_pre: t,
        investment_threshold: investment_thresholds(econ)[1],
    })
}

/// Sufficient condition under which country 2's short-run revenue is
/// quasiconcave in the minimum rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuasiconcavityCondition {
    /// Carve-out no larger than the capital wedge over one minus the small rate.
    SmallCarveOut,
    /// Carve-out between a lower band edge and the short-run ceiling at the large rate.
    LargeCarveOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiconcavityCheck {
    pub certified: Option<QuasiconcavityCondition>,
    /// Minimum rates of the scan, strictly inside the pre-policy band.
    pub grid: Vec<f64>,
    /// Country 2's short-run revenue at each scanned rate.
    pub revenue: Vec<f64>,
    pub pre_revenue: f64,
    /// Number of strict interior local maxima of the scan.
    pub interior_peaks: usize,
    /// Whether revenue falls below the pre-policy level at every scanned rate;
    /// evaluated only when certified and the small rate is below its investment threshold.
    pub loss_everywhere: Option<bool>,
}

/// Scan points used by the quasiconcavity check.
pub const SCAN_POINTS: usize = 50;

pub fn quasiconcavity_check(econ: &Economy, pre: &PreGmtEquilibrium, sigma: f64) -> Result<QuasiconcavityCheck> {
    let (t1n, t2n) = (pre.t1(), pre.t2());
    let (r, mu) = (econ.r(), econ.mu());
    let wedge = r * (1.0 - mu);
    let certified = if sigma <= wedge / (1.0 - t2n) {
        Some(QuasiconcavityCondition::SmallCarveOut)
    } else {
        let lo = wedge * (2.0 + t2n) / ((1.0 - t2n) * (2.0 - t2n));
        let hi = short_run_ceiling(econ, t1n, t2n);
        (lo <= sigma && sigma <= hi).then_some(QuasiconcavityCondition::LargeCarveOut)
    };
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|j| t2n + (j as f64 + 1.0) * (t1n - t2n) / (SCAN_POINTS as f64 + 1.0))
        .collect();
    let revenue = grid
        .iter()
        .map(|&t_m| {
            let p = GmtPolicy::new(t_m, sigma)?;
            Ok(short_run_at(econ, &p, pre)?.revenue(Country::Two))
        })
        .collect::<Result<Vec<f64>>>()?;
    let interior_peaks = revenue.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
    let pre_revenue = pre.revenue(Country::Two);
    let loss_everywhere =
        (certified.is_some() && t2n < investment_thresholds(econ)[1]).then(|| revenue.iter().all(|&v| v < pre_revenue));
    Ok(QuasiconcavityCheck {
        certified,
        grid,
        revenue,
        pre_revenue,
        interior_peaks,
        loss_everywhere,
    })
}

/// Elasticity of equilibrium profit shifting with respect to the minimum rate,
/// in absolute value, for minimum rates at or below country 1's investment threshold.
pub fn shifting_elasticity(econ: &Economy, t_m: f64) -> Result<f64> {
    let pre = nash_no_gmt(econ)?;
    shifting_elasticity_with_pre(econ, &pre, t_m)
}

pub fn shifting_elasticity_with_pre(econ: &Economy, pre: &PreGmtEquilibrium, t_m: f64) -> Result<f64> {
    if !(t_m > pre.t2() && t_m < pre.t1()) {
        return Err(Error::MinimumOutOfBand {
            t_m,
            lo: pre.t2(),
            hi: pre.t1(),
        });
    }
    let t1_star = investment_thresholds(econ)[0];
    if t_m > t1_star {
        return Err(Error::OutOfRegime(format!(
            "t_m = {t_m} exceeds country 1's investment threshold {t1_star}; equilibrium shifting may vanish"
        )));
    }
    let t1 = crate::equilibrium::best_response_no_gmt(econ, Country::One, t_m)?;
    let curvature = phi_raw(econ.alpha1(), econ.r(), econ.mu(), t1, 2);
    let slope = 1.0 / (2.0 - econ.delta() * curvature);
    Ok(t_m * (1.0 - slope) / (t1 - t_m))
}

/// Sufficient conditions for a long-run gain of country 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoConditions {
    pub carve_out_in_band: bool,
    pub below_large_threshold: bool,
    pub elasticity_at_most_one: bool,
    pub all_hold: bool,
    /// Whether country 2 actually gains, reported when every condition holds.
    pub gain_confirmed: Option<bool>,
}

/// Country 2's revenue split into taxation of true and of shifted profit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallRevenueSplit {
    pub true_profit: f64,
    pub shifted_profit: f64,
}

impl SmallRevenueSplit {
    fn of(b: &RevenueBreakdown) -> Self {
        SmallRevenueSplit {
            true_profit: b.true_profit_part - b.sbie_loss,
            shifted_profit: b.shifted_part,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    pub horizon: Horizon,
    pub policy: GmtPolicy,
    pub pre_taxes: TaxPair,
    pub taxes: TaxPair,
    pub regime: Option<Regime>,
    /// Short run: derivative of country 2's revenue in the minimum rate at the pre-policy rate.
    pub dr2_marginal: Option<f64>,
    /// Short run: sign of `dr2_marginal`. Long run: sign of `delta_r2`.
    pub sign_classification: SignClass,
    pub quasiconcavity: Option<QuasiconcavityCheck>,
    pub delta_r1: f64,
    pub delta_r2: f64,
    pub epsilon_g: Option<f64>,
    pub pareto_conditions: Option<ParetoConditions>,
    pub small_revenue_split: SmallRevenueSplit,
    pub pre_small_revenue_split: SmallRevenueSplit,
    pub warnings: Vec<String>,
}

pub fn short_run_effect_report(econ: &Economy, policy: &GmtPolicy) -> Result<EffectReport> {
    let pre = nash_no_gmt(econ)?;
    let report = short_run_outcome(econ, policy, &pre)?;
    let marginal = marginal_short_run_effect(econ, &pre, policy.sigma)?;
    Ok(EffectReport {
        horizon: Horizon::ShortRun,
        policy: *policy,
        pre_taxes: pre.taxes,
        taxes: pre.taxes,
        regime: None,
        dr2_marginal: Some(marginal.derivative),
        sign_classification: marginal.classification,
        quasiconcavity: Some(quasiconcavity_check(econ, &pre, policy.sigma)?),
        delta_r1: report.delta_revenue[0],
        delta_r2: report.delta_revenue[1],
        epsilon_g: None,
        pareto_conditions: None,
        small_revenue_split: SmallRevenueSplit::of(&report.revenues[1]),
        pre_small_revenue_split: SmallRevenueSplit::of(&pre.revenues[1]),
        warnings: report.warnings,
    })
}

pub fn long_run_effect_report(econ: &Economy, policy: &GmtPolicy) -> Result<EffectReport> {
    let pre = nash_no_gmt(econ)?;
    long_run_effect_with_pre(econ, policy, &pre)
}

pub fn long_run_effect_with_pre(econ: &Economy, policy: &GmtPolicy, pre: &PreGmtEquilibrium) -> Result<EffectReport> {
    let eq = nash_gmt_with_pre(econ, policy, pre)?;
    let delta_r1 = eq.revenue(Country::One) - pre.revenue(Country::One);
    let delta_r2 = eq.revenue(Country::Two) - pre.revenue(Country::Two);
    let epsilon_g = shifting_elasticity_with_pre(econ, pre, policy.t_m).ok();
    let bounds = sigma_bounds(econ, policy.t_m, pre.t2())?;
    let carve_out_in_band = bounds.undercut_switch[1] <= policy.sigma && policy.sigma <= bounds.upper;
    let below_large_threshold = policy.t_m <= investment_thresholds(econ)[0];
    let elasticity_at_most_one = epsilon_g.is_some_and(|e| e > 0.0 && e <= 1.0);
    let all_hold = carve_out_in_band && below_large_threshold && elasticity_at_most_one;
    Ok(EffectReport {
        horizon: Horizon::LongRun,
        policy: *policy,
        pre_taxes: pre.taxes,
        taxes: eq.taxes,
        regime: Some(eq.regime),
        dr2_marginal: None,
        sign_classification: SignClass::of(delta_r2),
        quasiconcavity: None,
        delta_r1,
        delta_r2,
        epsilon_g,
        pareto_conditions: Some(ParetoConditions {
            carve_out_in_band,
            below_large_threshold,
            elasticity_at_most_one,
            all_hold,
            gain_confirmed: all_hold.then_some(delta_r2 > 0.0),
        }),
        small_revenue_split: SmallRevenueSplit::of(&eq.revenues[1]),
        pre_small_revenue_split: SmallRevenueSplit::of(&pre.revenues[1]),
        warnings: eq.notes.clone(),
    })
}

/// Long-run change in country 2's revenue at `t2N + step`, with the same
/// carve-out rate, at half and double the step as a stability check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalLongRun {
    pub step: f64,
    pub delta_r2: [f64; 3],
    pub regimes: [Regime; 3],
    pub stable_sign: bool,
}

pub fn marginal_long_run_effect(econ: &Economy, pre: &PreGmtEquilibrium, sigma: f64) -> Result<MarginalLongRun> {
    let step = MARGINAL_STEP;
    let mut delta_r2 = [0.0; 3];
    let mut regimes = [Regime::Binding; 3];
    for (j, h) in [0.5 * step, step, 2.0 * step].into_iter().enumerate() {
        let eq = nash_gmt_with_pre(econ, &GmtPolicy::new(pre.t2() + h, sigma)?, pre)?;
        delta_r2[j] = eq.revenue(Country::Two) - pre.revenue(Country::Two);
        regimes[j] = eq.regime;
    }
    let s = SignClass::of(delta_r2[0]);
    Ok(MarginalLongRun {
        step,
        delta_r2,
        regimes,
        stable_sign: delta_r2.iter().all(|&d| SignClass::of(d) == s),
    })
}

/// A parameter point where a marginal minimum tax lowers country 2's long-run revenue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmfulReform {
    pub draw: u64,
    pub economy: Economy,
    pub sigma: f64,
    pub t_m: f64,
    pub pre_taxes: TaxPair,
    pub regime: Regime,
    pub delta_r2: f64,
}

/// Default number of draws of the harmful-reform search.
pub const HARMFUL_SEARCH_DRAWS: u64 = 10_000;

fn sample_draw(seed: u64, draw: u64) -> Option<(Economy, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let r = rng.gen_range(0.1..1.0);
    let alpha1 = r * rng.gen_range(1.5..6.0);
    let mu = rng.gen_range(0.0..0.9);
    let floor = crate::model::alpha2_floor(alpha1, r, mu).max(1.01 * r);
    let top = 0.999 * alpha1;
    if floor >= top {
        return None;
    }
    let alpha2 = rng.gen_range(floor..top);
    let delta = 10f64.powf(rng.gen_range(-1.0..3.0));
    let u: f64 = rng.gen_range(0.0..1.0);
    let econ = Economy::new(alpha1, alpha2, r, mu, delta).ok()?;
    Some((econ, u))
}

/// Whether the pre-policy conditions for a harmful marginal reform hold at
/// carve-out `sigma`, using bounds at the pre-policy small rate.
pub fn harmful_conditions(econ: &Economy, pre: &PreGmtEquilibrium, sigma: f64) -> Result<bool> {
    let t2n = pre.t2();
    let b = sigma_bounds(econ, t2n, t2n)?;
    let base = |a: f64| (a - econ.r()).powi(2) / (2.0 * (2.0 - t2n));
    Ok(t2n > investment_thresholds(econ)[0]
        && b.undercut_switch[1] < sigma
        && sigma < b.upper
        && sigma > b.lower
        && base(econ.alpha1()) > pre.revenue(Country::One)
        && base(econ.alpha2()) < pre.revenue(Country::Two))
}

fn evaluate_draw(seed: u64, draw: u64) -> Option<HarmfulReform> {
    let (econ, u) = sample_draw(seed, draw)?;
    let pre = nash_no_gmt(&econ).ok()?;
    let t2n = pre.t2();
    let b = sigma_bounds(&econ, t2n, t2n).ok()?;
    let lo = b.undercut_switch[1].max(b.lower).max(0.0);
    if lo >= b.upper {
        return None;
    }
    let sigma = lo + u * (b.upper - lo);
    if !harmful_conditions(&econ, &pre, sigma).ok()? {
        return None;
    }
    let t_m = t2n + MARGINAL_STEP;
    let eq: GmtEquilibrium = nash_gmt_with_pre(&econ, &GmtPolicy::new(t_m, sigma).ok()?, &pre).ok()?;
    let delta_r2 = eq.revenue(Country::Two) - pre.revenue(Country::Two);
    (delta_r2 < 0.0).then_some(HarmfulReform {
        draw,
        economy: econ,
        sigma,
        t_m,
        pre_taxes: pre.taxes,
        regime: eq.regime,
        delta_r2,
    })
}

/// Seeded random search for a harmful marginal reform; returns the lowest
/// successful draw index, independent of the worker count.
pub fn harmful_reform_search(seed: u64, draws: u64) -> Option<HarmfulReform> {
    (0..draws).into_par_iter().find_map_first(|d| evaluate_draw(seed, d))
}
