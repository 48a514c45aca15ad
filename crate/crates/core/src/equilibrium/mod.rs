//! Nash equilibria of the tax game before and after a minimum tax.

mod gmt;
mod haven;
mod pre;
mod short_run;

pub use gmt::{nash_gmt, nash_gmt_with_pre, undercut_rate, EquilibriumBranch, GmtEquilibrium, Regime, TIE_TOLERANCE};
pub use haven::nash_gmt_haven_case;
pub use pre::{
    best_response_no_gmt, comparative_statics_no_gmt, nash_no_gmt, nash_no_gmt_from, ComparativeStatics,
    PreGmtEquilibrium,
};
pub use short_run::{short_run_at, short_run_outcome, ShortRunReport};
