//! Two-country tax competition under a global minimum tax.

pub mod cli;
pub mod effects;
pub mod equilibrium;
pub mod error;
pub mod firm;
pub mod labor;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod revenue;
pub mod thresholds;

pub use error::{Error, ErrorClass, Result, ValidationError, Violation};
pub use firm::{FirmChoice, FirmPlan, GmtPolicy, TaxPair};
pub use model::{Country, Economy};
