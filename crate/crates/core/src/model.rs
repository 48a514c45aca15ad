//! Model primitives: the economy, the production technology and the
//! revenue a country raises from taxing an affiliate's true profit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError, Violation};

/// One of the two countries. `One` is the large country.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Country {
    One,
    Two,
}

impl Country {
    pub const BOTH: [Country; 2] = [Country::One, Country::Two];

    pub fn index(self) -> usize {
        match self {
            Country::One => 0,
            Country::Two => 1,
        }
    }

    pub fn other(self) -> Country {
        match self {
            Country::One => Country::Two,
            Country::Two => Country::One,
        }
    }

    /// Sign with which shifted profit `g` enters this country's tax base.
    pub fn inflow_sign(self) -> f64 {
        match self {
            Country::One => -1.0,
            Country::Two => 1.0,
        }
    }
}

/// Flat key-value form of an economy as it appears in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyRecord {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r: f64,
    pub mu: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pure_profit_tax: bool,
}

impl EconomyRecord {
    pub fn new(alpha1: f64, alpha2: f64, r: f64, mu: f64, delta: f64) -> Self {
        EconomyRecord {
            alpha1,
            alpha2,
            r,
            mu,
            delta,
            pure_profit_tax: false,
        }
    }

    pub fn validate(self) -> std::result::Result<Economy, ValidationError> {
        validate(self, false)
    }
}

/// Validated model primitives.
///
/// Two productivity intercepts, the world interest rate, the deductible
/// fraction of capital cost and the concealment-cost parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EconomyRecord", into = "EconomyRecord")]
pub struct Economy {
    alpha: [f64; 2],
    r: f64,
    mu: f64,
    delta: f64,
    pure_profit_tax: bool,
}

impl TryFrom<EconomyRecord> for Economy {
    type Error = ValidationError;

    fn try_from(rec: EconomyRecord) -> std::result::Result<Self, Self::Error> {
        rec.validate()
    }
}

impl From<Economy> for EconomyRecord {
    fn from(e: Economy) -> Self {
        EconomyRecord {
            alpha1: e.alpha[0],
            alpha2: e.alpha[1],
            r: e.r,
            mu: e.mu,
            delta: e.delta,
            pure_profit_tax: e.pure_profit_tax,
        }
    }
}

/// Smallest admissible productivity of the small country.
pub fn alpha2_floor(alpha1: f64, r: f64, mu: f64) -> f64 {
    r * (alpha1 * (2.0 - mu) - mu * r) / (alpha1 + r - 2.0 * mu * r)
}

// Negated comparisons also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn validate(rec: EconomyRecord, allow_equal: bool) -> std::result::Result<Economy, ValidationError> {
    let mut v = Vec::new();
    for (name, x) in [
        ("alpha1", rec.alpha1),
        ("alpha2", rec.alpha2),
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
    let ordered = if allow_equal {
        rec.alpha1 >= rec.alpha2
    } else {
        rec.alpha1 > rec.alpha2
    };
    if !ordered {
        v.push(Violation::ViolatedOrdering(format!(
            "alpha1 = {} must exceed alpha2 = {}",
            rec.alpha1, rec.alpha2
        )));
    }
    if !(rec.alpha2 > rec.r) {
        v.push(Violation::ViolatedOrdering(format!(
            "alpha2 = {} must exceed r = {}",
            rec.alpha2, rec.r
        )));
    }
    if !(rec.r > 0.0) {
        v.push(Violation::ViolatedOrdering(format!("r = {} must be positive", rec.r)));
    }
    let mu_ok = if rec.pure_profit_tax {
        rec.mu == 1.0
    } else {
        (0.0..1.0).contains(&rec.mu)
    };
    if !mu_ok {
        v.push(Violation::ViolatedDeductibility(rec.mu));
    }
    if !(rec.delta > 0.0) {
        v.push(Violation::NonpositiveDelta(rec.delta));
    }
    if v.is_empty() {
        let floor = alpha2_floor(rec.alpha1, rec.r, rec.mu);
        if rec.alpha2 < floor {
            v.push(Violation::ViolatedSmallness {
                alpha2: rec.alpha2,
                floor,
            });
        }
    }
    if v.is_empty() {
        Ok(Economy {
            alpha: [rec.alpha1, rec.alpha2],
            r: rec.r,
            mu: rec.mu,
            delta: rec.delta,
            pure_profit_tax: rec.pure_profit_tax,
        })
    } else {
        Err(ValidationError { violations: v })
    }
}

/// Validates five raw numbers `(alpha1, alpha2, r, mu, delta)`.
pub fn validate_economy(raw: [f64; 5]) -> std::result::Result<Economy, ValidationError> {
    EconomyRecord::new(raw[0], raw[1], raw[2], raw[3], raw[4]).validate()
}

impl Economy {
    pub fn new(alpha1: f64, alpha2: f64, r: f64, mu: f64, delta: f64) -> Result<Self> {
        Ok(validate_economy([alpha1, alpha2, r, mu, delta])?)
    }

    /// Economy with a fully deductible capital cost (`mu = 1`), for limit tests.
    pub fn pure_profit_tax(alpha1: f64, alpha2: f64, r: f64, delta: f64) -> Result<Self> {
        let rec = EconomyRecord {
            pure_profit_tax: true,
            ..EconomyRecord::new(alpha1, alpha2, r, 1.0, delta)
        };
        Ok(validate(rec, false)?)
    }

    /// Two identical countries. Only the strict productivity ordering is relaxed.
    pub fn identical(alpha: f64, r: f64, mu: f64, delta: f64) -> Result<Self> {
        Ok(validate(EconomyRecord::new(alpha, alpha, r, mu, delta), true)?)
    }

    pub fn record(&self) -> EconomyRecord {
        (*self).into()
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Ok(validate(
            EconomyRecord { delta, ..self.record() },
            self.alpha[0] == self.alpha[1],
        )?)
    }

    pub fn with_alpha2(&self, alpha2: f64) -> Result<Self> {
        Ok(EconomyRecord {
            alpha2,
            ..self.record()
        }
        .validate()?)
    }

    pub fn alpha(&self, i: Country) -> f64 {
        self.alpha[i.index()]
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha[0]
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha[1]
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
    pub fn is_pure_profit_tax(&self) -> bool {
        self.pure_profit_tax
    }

    /// Non-deductible part of the capital cost per unit, `(1 - mu) r`.
    pub fn capital_wedge(&self) -> f64 {
        (1.0 - self.mu) * self.r
    }

    /// Tax rate above which country `i` attracts no capital without a minimum tax.
    pub fn corner_rate(&self, i: Country) -> f64 {
        let a = self.alpha(i);
        (a - self.r) / (a - self.mu * self.r)
    }

    /// Smallness floor for `alpha2` given the other primitives.
    pub fn alpha2_floor(&self) -> f64 {
        alpha2_floor(self.alpha[0], self.r, self.mu)
    }

    /// Taxable true profit `f(k) - mu r k` of affiliate `i`.
    pub fn true_profit(&self, i: Country, k: f64) -> f64 {
        let a = self.alpha(i);
        a * k - 0.5 * k * k - self.mu * self.r * k
    }
}

/// Output `alpha_i k - k^2 / 2`.
pub fn production(econ: &Economy, i: Country, k: f64) -> Result<f64> {
    if k < 0.0 || k.is_nan() {
        return Err(Error::NegativeCapital(k));
    }
    let a = econ.alpha(i);
    Ok(a * k - 0.5 * k * k)
}

/// Pre-tax true profit per unit of tax at rate `t` when capital is at its
/// interior optimum.
fn profit_at_rate(a: f64, r: f64, mu: f64, t: f64) -> f64 {
    let u = 1.0 - t;
    0.5 * a * a - a * mu * r - r * r * (1.0 - mu * t) * (1.0 - 2.0 * mu + mu * t) / (2.0 * u * u)
}

pub(crate) fn phi_raw(a: f64, r: f64, mu: f64, t: f64, order: u8) -> f64 {
    let u = 1.0 - t;
    let w = r * r * (1.0 - mu) * (1.0 - mu);
    match order {
        0 => t * profit_at_rate(a, r, mu, t),
        1 => profit_at_rate(a, r, mu, t) - t * w / (u * u * u),
        2 => -w * (2.0 + t) / u.powi(4),
        _ => -3.0 * w * (3.0 + t) / u.powi(5),
    }
}

/// Revenue from taxing affiliate `i`'s true profit at rate `t`, or one of its
/// first three derivatives.
///
/// This is the interior closed form; past the investment corner it is the
/// smooth continuation of that expression.
pub fn phi(econ: &Economy, i: Country, t: f64, order: u8) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::TaxOutOfRange {
            name: "t",
            value: t,
            range: "[0, 1)",
        });
    }
    if order > 3 {
        return Err(Error::InvalidArgument(format!("derivative order {order} exceeds 3")));
    }
    Ok(phi_raw(econ.alpha(i), econ.r, econ.mu, t, order))
}
