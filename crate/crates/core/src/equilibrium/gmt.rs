use serde::{Deserialize, Serialize};

use crate::equilibrium::haven::haven_with_pre;
use crate::equilibrium::{best_response_no_gmt, nash_no_gmt, PreGmtEquilibrium};
use crate::error::{Error, Result};
use crate::firm::{FirmChoice, GmtPolicy, TaxPair};
use crate::model::{phi_raw, Country, Economy};
use crate::revenue::{outcome, RevenueBreakdown};
use crate::thresholds::{investment_thresholds, sigma_bounds, CarveOutBounds};

/// Absolute tolerance under which the large country's two options count as equal.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Country 2 sets exactly the minimum rate.
    Binding,
    /// Country 2 undercuts the minimum; country 1 stays above it.
    SmallUndercuts,
    /// Both countries undercut the minimum.
    BothUndercut,
    /// Country 1 is indifferent between staying above and undercutting.
    Tie,
    /// Country 2 attracts no capital and a continuum of its rates are equilibria.
    HavenContinuum,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Binding => "Binding",
            Regime::SmallUndercuts => "SmallUndercuts",
            Regime::BothUndercut => "BothUndercut",
            Regime::Tie => "Tie",
            Regime::HavenContinuum => "HavenContinuum",
        }
    }
}

/// Country 1's rate together with a closed interval of country 2 rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumBranch {
    pub t1: f64,
    pub t2_interval: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmtEquilibrium {
    pub regime: Regime,
    pub policy: GmtPolicy,
    pub pre_taxes: TaxPair,
    /// Representative equilibrium (the Pareto-dominant one at a tie).
    pub taxes: TaxPair,
    /// The second equilibrium at a tie.
    pub alternative: Option<TaxPair>,
    /// Each country's optimal rate below the minimum.
    pub undercut_taxes: [f64; 2],
    /// Country 1's unconstrained best response to the minimum rate.
    pub large_response: f64,
    /// Country 1's revenue when staying above the minimum, when compared.
    pub large_revenue_staying: Option<f64>,
    /// Country 1's revenue when undercutting, when compared.
    pub large_revenue_undercutting: Option<f64>,
    pub bounds: CarveOutBounds,
    pub choice: FirmChoice,
    pub revenues: [RevenueBreakdown; 2],
    /// Continuum of equilibria, filled only in the haven regime.
    pub equilibrium_set: Vec<EquilibriumBranch>,
    pub notes: Vec<String>,
}

impl GmtEquilibrium {
    pub fn revenue(&self, i: Country) -> f64 {
        self.revenues[i.index()].total
    }

    /// Every equilibrium tax pair named explicitly (the representative first).
    pub fn candidates(&self) -> Vec<TaxPair> {
        let mut v = vec![self.taxes];
        v.extend(self.alternative);
        v
    }
}

/// Country `i`'s revenue-maximizing rate below the minimum.
pub fn undercut_rate(bounds: &CarveOutBounds, sigma: f64, i: Country) -> f64 {
    let switch = bounds.undercut_switch[i.index()];
    let t_m = bounds.t_m;
    if sigma > 0.0 {
        ((1.0 - switch / sigma) * t_m).clamp(0.0, t_m)
    } else if switch >= 0.0 {
        0.0
    } else {
        t_m
    }
}

/// Country 1's revenue at its best response to a rival effectively taxed at `t_m`.
pub(crate) fn large_revenue_staying(econ: &Economy, t_m: f64) -> Result<(f64, f64)> {
    let t1 = best_response_no_gmt(econ, Country::One, t_m)?;
    let r = phi_raw(econ.alpha1(), econ.r(), econ.mu(), t1, 0) - t1 * (t1 - t_m) / econ.delta();
    Ok((t1, r))
}

/// Country 1's revenue at its optimal undercut when shifting is absent.
pub(crate) fn large_revenue_undercutting(econ: &Economy, bounds: &CarveOutBounds, sigma: f64) -> f64 {
    let t_m = bounds.t_m;
    let switch = bounds.undercut_switch[0];
    let base = (econ.alpha1() - econ.r()).powi(2) / (2.0 * (2.0 - t_m));
    if sigma > switch {
        base
    } else {
        base - (switch - sigma).powi(2) * (2.0 - t_m) * t_m * t_m / (2.0 * (1.0 - t_m).powi(2))
    }
}

pub(crate) fn check_band(policy: &GmtPolicy, pre: &PreGmtEquilibrium) -> Result<()> {
    policy.validate()?;
    if !(policy.t_m > pre.t2() && policy.t_m < pre.t1()) {
        return Err(Error::MinimumOutOfBand {
            t_m: policy.t_m,
            lo: pre.t2(),
            hi: pre.t1(),
        });
    }
    Ok(())
}

/// Long-run equilibrium under a minimum tax.
///
/// Carve-out rates at or below the haven floor are routed to the haven case.
pub fn nash_gmt(econ: &Economy, policy: &GmtPolicy) -> Result<GmtEquilibrium> {
    let pre = nash_no_gmt(econ)?;
    nash_gmt_with_pre(econ, policy, &pre)
}

/// Long-run equilibrium reusing an already solved pre-policy equilibrium.
pub fn nash_gmt_with_pre(econ: &Economy, policy: &GmtPolicy, pre: &PreGmtEquilibrium) -> Result<GmtEquilibrium> {
    check_band(policy, pre)?;
    let bounds = sigma_bounds(econ, policy.t_m, pre.t2())?;
    if policy.sigma <= bounds.lower {
        let mut eq = haven_with_pre(econ, policy, pre)?;
        eq.notes.insert(
            0,
            format!(
                "carve-out rate {} is at or below the floor {}; solved as the haven case",
                policy.sigma, bounds.lower
            ),
        );
        return Ok(eq);
    }
    if policy.sigma > bounds.upper {
        return Err(Error::CarveOutOfBand {
            sigma: policy.sigma,
            lo: bounds.lower,
            hi: bounds.upper,
        });
    }
    let t_m = policy.t_m;
    let [t1_star, t2_star] = investment_thresholds(econ);
    let undercut = [
        undercut_rate(&bounds, policy.sigma, Country::One),
        undercut_rate(&bounds, policy.sigma, Country::Two),
    ];
    let (t1_resp, r_stay) = large_revenue_staying(econ, t_m)?;
    let mut staying = None;
    let mut undercutting = None;
    let mut alternative = None;
    let mut notes = Vec::new();
    let (regime, taxes) = if t_m <= t2_star {
        (Regime::Binding, TaxPair { t1: t1_resp, t2: t_m })
    } else if t_m <= t1_star {
        (
            Regime::SmallUndercuts,
            TaxPair {
                t1: t1_resp,
                t2: undercut[1],
            },
        )
    } else {
        let r_under = large_revenue_undercutting(econ, &bounds, policy.sigma);
        staying = Some(r_stay);
        undercutting = Some(r_under);
        let high = TaxPair {
            t1: t1_resp,
            t2: undercut[1],
        };
        let low = TaxPair {
            t1: undercut[0],
            t2: undercut[1],
        };
        if (r_stay - r_under).abs() <= TIE_TOLERANCE {
            alternative = Some(low);
            notes.push(
                "both tax pairs are equilibria; the pair with country 1 above the minimum \
                 Pareto-dominates the pair where both undercut"
                    .into(),
            );
            (Regime::Tie, high)
        } else if r_stay > r_under {
            (Regime::SmallUndercuts, high)
        } else {
            (Regime::BothUndercut, low)
        }
    };
    let out = outcome(econ, Some(policy), &taxes)?;
    Ok(GmtEquilibrium {
        regime,
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
        equilibrium_set: Vec::new(),
        notes: std::mem::take(&mut notes),
    })
}
