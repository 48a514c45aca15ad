use std::fmt;

use thiserror::Error;

/// One violated invariant of an economy record.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// The productivity ordering `alpha1 > alpha2 > r > 0` fails.
    ViolatedOrdering(String),
    /// The deductible fraction lies outside `[0, 1)`.
    ViolatedDeductibility(f64),
    /// The small country's productivity is below the smallness floor.
    ViolatedSmallness { alpha2: f64, floor: f64 },
    /// The concealment cost is not strictly positive.
    NonpositiveDelta(f64),
    /// A parameter is NaN or infinite.
    NonFinite(&'static str),
    /// A labor-model parameter is outside its admissible range.
    ViolatedLabor(String),
}

impl Violation {
    /// Stable name of the violated invariant.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::ViolatedOrdering(_) => "ViolatedOrdering",
            Violation::ViolatedDeductibility(_) => "ViolatedDeductibility",
            Violation::ViolatedSmallness { .. } => "ViolatedSmallness",
            Violation::NonpositiveDelta(_) => "NonpositiveDelta",
            Violation::NonFinite(_) => "NonFinite",
            Violation::ViolatedLabor(_) => "ViolatedLabor",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ViolatedOrdering(msg) => write!(f, "ViolatedOrdering ({msg})"),
            Violation::ViolatedDeductibility(mu) => {
                write!(f, "ViolatedDeductibility (mu = {mu} is outside [0, 1))")
            }
            Violation::ViolatedSmallness { alpha2, floor } => {
                write!(f, "ViolatedSmallness (alpha2 = {alpha2} < floor {floor})")
            }
            Violation::NonpositiveDelta(d) => write!(f, "NonpositiveDelta (delta = {d})"),
            Violation::NonFinite(field) => write!(f, "NonFinite ({field} is not a finite number)"),
            Violation::ViolatedLabor(msg) => write!(f, "ViolatedLabor ({msg})"),
        }
    }
}

/// Every violated invariant found while validating a record.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn contains(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.name() == name)
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ValidationError {}

/// Broad class of an error, used for process exit codes and C status codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numeric,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("Validation: {0}")]
    Validation(#[from] ValidationError),
    #[error("NegativeCapital: capital {0} is negative")]
    NegativeCapital(f64),
    #[error("TaxOutOfRange: {name} = {value} is outside {range}")]
    TaxOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("InvalidPolicy: {0}")]
    InvalidPolicy(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("MinimumOutOfBand: t_m = {t_m} must lie strictly between {lo} and {hi}")]
    MinimumOutOfBand { t_m: f64, lo: f64, hi: f64 },
    #[error("CarveOutOfBand: sigma = {sigma} is outside the admissible band ({lo}, {hi}]")]
    CarveOutOfBand { sigma: f64, lo: f64, hi: f64 },
    #[error("CarveTooLarge: sigma = {sigma} exceeds the haven bound {bound}")]
    CarveTooLarge { sigma: f64, bound: f64 },
    #[error("OutOfRegime: {0}")]
    OutOfRegime(String),
    #[error("NotApplicable: {0}")]
    NotApplicable(String),
    #[error("RootNotBracketed: {what} has no sign change on [{lo}, {hi}]")]
    RootNotBracketed { what: String, lo: f64, hi: f64 },
    #[error("NoConvergence: {what} after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },
    #[error("NoSignChange: no crossing found for {what} on [{lo}, {hi}]")]
    NoSignChange { what: String, lo: f64, hi: f64 },
    #[error("EvaluationFailed: function failed at x = {x}: {reason}")]
    EvaluationFailed { x: f64, reason: String },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Validation(_)
            | Error::NegativeCapital(_)
            | Error::TaxOutOfRange { .. }
            | Error::InvalidPolicy(_)
            | Error::InvalidArgument(_)
            | Error::MinimumOutOfBand { .. }
            | Error::CarveOutOfBand { .. }
            | Error::CarveTooLarge { .. }
            | Error::OutOfRegime(_)
            | Error::NotApplicable(_) => ErrorClass::Validation,
            Error::RootNotBracketed { .. }
            | Error::NoConvergence { .. }
            | Error::NoSignChange { .. }
            | Error::EvaluationFailed { .. } => ErrorClass::Numeric,
        }
    }

    /// Stable variant name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Validation(_) => "Validation",
            Error::NegativeCapital(_) => "NegativeCapital",
            Error::TaxOutOfRange { .. } => "TaxOutOfRange",
            Error::InvalidPolicy(_) => "InvalidPolicy",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::MinimumOutOfBand { .. } => "MinimumOutOfBand",
            Error::CarveOutOfBand { .. } => "CarveOutOfBand",
            Error::CarveTooLarge { .. } => "CarveTooLarge",
            Error::OutOfRegime(_) => "OutOfRegime",
            Error::NotApplicable(_) => "NotApplicable",
            Error::RootNotBracketed { .. } => "RootNotBracketed",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::EvaluationFailed { .. } => "EvaluationFailed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
