//! Derived constants: investment thresholds, carve-out bounds, limit
//! quantities of the large country's revenue, and concealment-cost
//! thresholds.

use serde::{Deserialize, Serialize};

use crate::equilibrium::nash_no_gmt;
use crate::error::{Error, Result};
use crate::firm::TaxPair;
use crate::model::{phi_raw, Country, Economy};
use crate::numeric::{bisect, bisect_log};

/// Tax rate above which each country's investment elasticity exceeds one,
/// for country 1 and country 2.
pub fn investment_thresholds(econ: &Economy) -> [f64; 2] {
    Country::BOTH.map(|i| {
        let a = econ.alpha(i);
        let r = econ.r();
        let mu = econ.mu();
        1.0 - (r * (1.0 - mu) / (a - mu * r)).sqrt()
    })
}

/// Carve-out bounds at a given minimum rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarveOutBounds {
    pub t_m: f64,
    /// At or below this rate the small country attracts no capital even at a zero tax.
    pub lower: f64,
    /// Largest rate keeping excess profit non-negative in the long run.
    pub upper: f64,
    /// Largest rate keeping the small country's excess profit positive in the short run.
    pub short_run_upper: f64,
    /// Rate above which each country's optimal undercut is strictly positive.
    pub undercut_switch: [f64; 2],
}

fn undercut_switch(econ: &Economy, i: Country, t_m: f64) -> f64 {
    let r = econ.r();
    let mu = econ.mu();
    let a = econ.alpha(i);
    (r * (1.0 - 2.0 * mu * t_m + mu * t_m * t_m) - a * (1.0 - t_m).powi(2)) / (t_m * (2.0 - t_m))
}

/// Short-run carve-out ceiling at minimum rate `t_m` given country 2's pre-policy rate.
pub fn short_run_ceiling(econ: &Economy, t_m: f64, t2n: f64) -> f64 {
    let (a2, r, mu) = (econ.alpha2(), econ.r(), econ.mu());
    (a2 * (1.0 - t_m) + r * (1.0 - (2.0 - t_m) * mu)) / (2.0 - t2n - t_m)
}

pub fn sigma_bounds(econ: &Economy, t_m: f64, t2n: f64) -> Result<CarveOutBounds> {
    if !(t_m > 0.0 && t_m < 1.0) {
        return Err(Error::TaxOutOfRange {
            name: "t_m",
            value: t_m,
            range: "(0, 1)",
        });
    }
    if !(0.0..1.0).contains(&t2n) {
        return Err(Error::TaxOutOfRange {
            name: "t2N",
            value: t2n,
            range: "[0, 1)",
        });
    }
    let (a2, r, mu) = (econ.alpha2(), econ.r(), econ.mu());
    Ok(CarveOutBounds {
        t_m,
        lower: ((1.0 - mu * t_m) * r - a2 * (1.0 - t_m)) / t_m,
        upper: (a2 * (1.0 - t_m) + r * (1.0 + (t_m - 2.0) * mu)) / (2.0 - t_m),
        short_run_upper: short_run_ceiling(econ, t_m, t2n),
        undercut_switch: Country::BOTH.map(|i| undercut_switch(econ, i, t_m)),
    })
}

/// Limits of the large country's revenue when it can tax without competition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitQuantities {
    /// Rate maximizing revenue from true profit alone.
    pub revenue_peak_rate: f64,
    /// Revenue at that rate.
    pub revenue_peak: f64,
    /// Minimum rate above which undercutting beats the revenue peak.
    pub undercut_crossover_rate: f64,
    /// Productivity of country 2 above which its rate can pass country 1's investment threshold.
    pub alpha2_critical: f64,
}

/// Productivity of country 2 above which its pre-policy rate can exceed
/// country 1's investment threshold.
pub fn alpha2_critical(econ: &Economy) -> f64 {
    let (a1, r, mu) = (econ.alpha1(), econ.r(), econ.mu());
    let b = a1 - mu * r;
    let w = r * (1.0 - mu);
    (b * (2.0 * (w * b).sqrt() - w)).sqrt() + mu * r
}

pub fn limit_quantities(econ: &Economy) -> Result<LimitQuantities> {
    if econ.is_pure_profit_tax() {
        return Err(Error::NotApplicable(
            "limit quantities need a partially deductible capital cost (mu < 1)".into(),
        ));
    }
    let (a1, r, mu) = (econ.alpha1(), econ.r(), econ.mu());
    let hi = econ.corner_rate(Country::One);
    let t = bisect(|t| phi_raw(a1, r, mu, t, 1), 0.0, hi, 0.0, "revenue peak rate")?;
    let u = 1.0 - t;
    let peak = r * r * (1.0 - mu).powi(2) * t * t / (u * u * u);
    let root = ((1.0 + t) / (u * u * u)).sqrt();
    let crossover = 2.0 - (u * u * u / (2.0 * t * t)) * (root - 1.0).powi(2);
    Ok(LimitQuantities {
        revenue_peak_rate: t,
        revenue_peak: peak,
        undercut_crossover_rate: crossover,
        alpha2_critical: alpha2_critical(econ),
    })
}

/// Default concealment-cost search band and its expansion schedule.
pub const DELTA_BAND: (f64, f64) = (1e-3, 1e3);
const BAND_EXPANSIONS: usize = 3;
const SCAN_POINTS_PER_DECADE: f64 = 10.0;
const DELTA_REL_TOL: f64 = 1e-9;

/// Concealment costs at which country 2's pre-policy rate crosses the
/// investment thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaThresholds {
    /// Cost at which country 2's rate equals its own investment threshold.
    pub investment_crossing: f64,
    /// Cost at which country 2's rate equals country 1's investment threshold.
    pub large_crossing: Option<f64>,
}

fn pre_rate_2(econ: &Economy, delta: f64) -> Result<f64> {
    Ok(nash_no_gmt(&econ.with_delta(delta)?)?.taxes.t2)
}

fn crossing(econ: &Economy, target: f64, band: (f64, f64), what: &str) -> Result<f64> {
    let (mut lo, mut hi) = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("search band [{lo}, {hi}] is invalid")));
    }
    for expansion in 0..=BAND_EXPANSIONS {
        if expansion > 0 {
            lo /= 10.0;
            hi *= 10.0;
        }
        let decades = (hi / lo).log10();
        let n = (decades * SCAN_POINTS_PER_DECADE).ceil().max(2.0) as usize;
        let ratio = (hi / lo).powf(1.0 / n as f64);
        let mut prev_d = lo;
        let mut prev_f = pre_rate_2(econ, lo)? - target;
        for j in 1..=n {
            let d = if j == n { hi } else { lo * ratio.powi(j as i32) };
            let f = pre_rate_2(econ, d)? - target;
            if prev_f == 0.0 {
                return Ok(prev_d);
            }
            if prev_f.signum() != f.signum() {
                let mut err = None;
                let root = bisect_log(
                    |d| match pre_rate_2(econ, d) {
                        Ok(t) => t - target,
                        Err(e) => {
                            err.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    prev_d,
                    d,
                    DELTA_REL_TOL,
                    what,
                )?;
                if let Some(e) = err {
                    return Err(e);
                }
                return Ok(root);
            }
            prev_d = d;
            prev_f = f;
        }
    }
    Err(Error::NoSignChange {
        what: what.to_string(),
        lo,
        hi,
    })
}

/// Cost at which country 2's pre-policy rate equals its investment threshold.
pub fn delta_investment_crossing(econ: &Economy, band: (f64, f64)) -> Result<f64> {
    let target = investment_thresholds(econ)[1];
    crossing(econ, target, band, "country 2 rate minus its investment threshold")
}

/// Cost at which country 2's pre-policy rate equals country 1's investment
/// threshold. Exists only when `alpha2` exceeds the critical productivity.
pub fn delta_large_crossing(econ: &Economy, band: (f64, f64)) -> Result<f64> {
    let critical = alpha2_critical(econ);
    if econ.alpha2() <= critical {
        return Err(Error::NotApplicable(format!(
            "alpha2 = {} does not exceed the critical productivity {critical}; \
             country 2's rate stays below country 1's investment threshold",
            econ.alpha2()
        )));
    }
    let target = investment_thresholds(econ)[0];
    crossing(
        econ,
        target,
        band,
        "country 2 rate minus country 1's investment threshold",
    )
}

pub fn delta_thresholds(econ: &Economy, band: (f64, f64)) -> Result<DeltaThresholds> {
    let investment_crossing = delta_investment_crossing(econ, band)?;
    let large_crossing = match delta_large_crossing(econ, band) {
        Ok(d) => Some(d),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DeltaThresholds {
        investment_crossing,
        large_crossing,
    })
}

/// Every derived constant of one economy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub investment_thresholds: [f64; 2],
    pub alpha2_floor: f64,
    pub limits: LimitQuantities,
    pub pre_taxes: TaxPair,
    pub carve_out: Option<CarveOutBounds>,
    pub delta: DeltaThresholds,
}

/// All thresholds; carve-out bounds are included when a minimum rate is given.
pub fn threshold_set(econ: &Economy, t_m: Option<f64>) -> Result<ThresholdSet> {
    let pre = nash_no_gmt(econ)?;
    let carve_out = t_m.map(|t| sigma_bounds(econ, t, pre.taxes.t2)).transpose()?;
    Ok(ThresholdSet {
        investment_thresholds: investment_thresholds(econ),
        alpha2_floor: econ.alpha2_floor(),
        limits: limit_quantities(econ)?,
        pre_taxes: pre.taxes,
        carve_out,
        delta: delta_thresholds(econ, DELTA_BAND)?,
    })
}
