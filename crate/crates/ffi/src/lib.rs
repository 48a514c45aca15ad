//! C ABI for `gmtcomp`.
//!
//! Economies are opaque handles created by `gmtc_*_new` and released by the
//! matching `gmtc_*_free`. Every fallible call returns a [`GmtcStatus`] and
//! writes its result through an out-pointer only on success. The message of
//! the most recent failure on the calling thread is available from
//! [`gmtc_last_error_message`]. Handles are immutable and may be shared
//! across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gmtcomp::equilibrium::{nash_gmt, nash_no_gmt, Regime};
use gmtcomp::labor::{nash_labor_gmt, nash_labor_no_gmt, LaborEconomy};
use gmtcomp::thresholds::{investment_thresholds, limit_quantities};
use gmtcomp::{Country, Economy, ErrorClass, GmtPolicy};

/// Result of a C API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmtcStatus {
    Ok = 0,
    /// Inputs violate a model invariant or lie outside an admissible band.
    Validation = 1,
    /// A root finder or fixed-point iteration failed.
    Numeric = 2,
    /// A required pointer argument was null.
    NullPointer = 10,
    /// The library panicked; the handle arguments are unchanged.
    Panic = 11,
}

/// Equilibrium regime under a minimum tax.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmtcRegime {
    Binding = 0,
    SmallUndercuts = 1,
    BothUndercut = 2,
    Tie = 3,
    HavenContinuum = 4,
}

impl From<Regime> for GmtcRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::Binding => GmtcRegime::Binding,
            Regime::SmallUndercuts => GmtcRegime::SmallUndercuts,
            Regime::BothUndercut => GmtcRegime::BothUndercut,
            Regime::Tie => GmtcRegime::Tie,
            Regime::HavenContinuum => GmtcRegime::HavenContinuum,
        }
    }
}

/// Opaque capital-model economy.
pub struct GmtcEconomy(Economy);

/// Opaque labor-model economy.
pub struct GmtcLaborEconomy(LaborEconomy);

/// Equilibrium without a minimum tax.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GmtcPreEquilibrium {
    pub t1: f64,
    pub t2: f64,
    pub k1: f64,
    pub k2: f64,
    /// Profit shifted into country 2.
    pub g: f64,
    pub revenue1: f64,
    pub revenue2: f64,
}

/// Equilibrium under a minimum tax. For the haven continuum the rates are a
/// representative member of the equilibrium set.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmtcGmtEquilibrium {
    pub regime: GmtcRegime,
    pub t1: f64,
    pub t2: f64,
    pub k1: f64,
    pub k2: f64,
    pub g: f64,
    pub revenue1: f64,
    pub revenue2: f64,
}

/// Rate thresholds of an economy.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GmtcThresholds {
    /// Rate above which country 1 would attract more capital by undercutting.
    pub investment_threshold1: f64,
    pub investment_threshold2: f64,
    pub revenue_peak_rate: f64,
    pub revenue_peak: f64,
    pub undercut_crossover_rate: f64,
    pub alpha2_critical: f64,
}

/// Labor-model equilibrium, with or without a minimum tax.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmtcLaborEquilibrium {
    /// `Binding` when no minimum tax applies.
    pub regime: GmtcRegime,
    pub t1: f64,
    pub t2: f64,
    pub k1: f64,
    pub k2: f64,
    pub w1: f64,
    pub w2: f64,
    pub g: f64,
    pub revenue1: f64,
    pub revenue2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: GmtcStatus, msg: &str) -> GmtcStatus {
    set_last_error(msg);
    status
}

fn model_error(e: gmtcomp::Error) -> GmtcStatus {
    let status = match e.class() {
        ErrorClass::Validation => GmtcStatus::Validation,
        ErrorClass::Numeric => GmtcStatus::Numeric,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, mapping errors and panics to a status and storing its value in `out`.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, GmtcStatus>) -> GmtcStatus {
    if out.is_null() {
        return fail(GmtcStatus::NullPointer, "output pointer is null");
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller guarantees it is valid for writes.
            unsafe { out.write(v) };
            set_last_error("");
            GmtcStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GmtcStatus::Panic, "internal panic"),
    }
}

fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, GmtcStatus> {
    // SAFETY: non-null handles come from the matching constructor and are not yet freed.
    unsafe { p.as_ref() }.ok_or_else(|| fail(GmtcStatus::NullPointer, &format!("{what} is null")))
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gmtc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gmtc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates the parameters and creates an economy handle.
#[no_mangle]
pub extern "C" fn gmtc_economy_new(
    alpha1: f64,
    alpha2: f64,
    r: f64,
    mu: f64,
    delta: f64,
    out: *mut *mut GmtcEconomy,
) -> GmtcStatus {
    guarded(out, || {
        let e = Economy::new(alpha1, alpha2, r, mu, delta).map_err(model_error)?;
        Ok(Box::into_raw(Box::new(GmtcEconomy(e))))
    })
}

/// Releases an economy handle. Null is ignored.
///
/// # Safety
/// `econ` must be null or a handle from [`gmtc_economy_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmtc_economy_free(econ: *mut GmtcEconomy) {
    if !econ.is_null() {
        drop(Box::from_raw(econ));
    }
}

/// Equilibrium without a minimum tax.
///
/// # Safety
/// `econ` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gmtc_nash_no_gmt(econ: *const GmtcEconomy, out: *mut GmtcPreEquilibrium) -> GmtcStatus {
    guarded(out, || {
        let e = &deref(econ, "economy")?.0;
        let eq = nash_no_gmt(e).map_err(model_error)?;
        Ok(GmtcPreEquilibrium {
            t1: eq.t1(),
            t2: eq.t2(),
            k1: eq.choice.k1,
            k2: eq.choice.k2,
            g: eq.choice.g,
            revenue1: eq.revenue(Country::One),
            revenue2: eq.revenue(Country::Two),
        })
    })
}

/// Long-run equilibrium under minimum rate `t_m` and carve-out rate `sigma`.
///
/// # Safety
/// `econ` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gmtc_nash_gmt(
    econ: *const GmtcEconomy,
    t_m: f64,
    sigma: f64,
    out: *mut GmtcGmtEquilibrium,
) -> GmtcStatus {
    guarded(out, || {
        let e = &deref(econ, "economy")?.0;
        let policy = GmtPolicy::new(t_m, sigma).map_err(model_error)?;
        let eq = nash_gmt(e, &policy).map_err(model_error)?;
        Ok(GmtcGmtEquilibrium {
            regime: eq.regime.into(),
            t1: eq.taxes.t1,
            t2: eq.taxes.t2,
            k1: eq.choice.k1,
            k2: eq.choice.k2,
            g: eq.choice.g,
            revenue1: eq.revenue(Country::One),
            revenue2: eq.revenue(Country::Two),
        })
    })
}

/// Investment thresholds and revenue limits.
///
/// # Safety
/// `econ` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gmtc_thresholds(econ: *const GmtcEconomy, out: *mut GmtcThresholds) -> GmtcStatus {
    guarded(out, || {
        let e = &deref(econ, "economy")?.0;
        let [t1, t2] = investment_thresholds(e);
        let lq = limit_quantities(e).map_err(model_error)?;
        Ok(GmtcThresholds {
            investment_threshold1: t1,
            investment_threshold2: t2,
            revenue_peak_rate: lq.revenue_peak_rate,
            revenue_peak: lq.revenue_peak,
            undercut_crossover_rate: lq.undercut_crossover_rate,
            alpha2_critical: lq.alpha2_critical,
        })
    })
}

/// Validates the parameters and creates a labor economy handle.
#[no_mangle]
pub extern "C" fn gmtc_labor_economy_new(
    lambda: f64,
    beta: f64,
    lbar1: f64,
    lbar2: f64,
    r: f64,
    mu: f64,
    delta: f64,
    out: *mut *mut GmtcLaborEconomy,
) -> GmtcStatus {
    guarded(out, || {
        let e = LaborEconomy::new(lambda, beta, lbar1, lbar2, r, mu, delta).map_err(model_error)?;
        Ok(Box::into_raw(Box::new(GmtcLaborEconomy(e))))
    })
}

/// Releases a labor economy handle. Null is ignored.
///
/// # Safety
/// `econ` must be null or a handle from [`gmtc_labor_economy_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmtc_labor_economy_free(econ: *mut GmtcLaborEconomy) {
    if !econ.is_null() {
        drop(Box::from_raw(econ));
    }
}

/// Labor-model equilibrium without a minimum tax.
///
/// # Safety
/// `econ` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gmtc_labor_nash_no_gmt(
    econ: *const GmtcLaborEconomy,
    out: *mut GmtcLaborEquilibrium,
) -> GmtcStatus {
    guarded(out, || {
        let e = &deref(econ, "labor economy")?.0;
        let eq = nash_labor_no_gmt(e).map_err(model_error)?;
        let c = eq.choice;
        Ok(GmtcLaborEquilibrium {
            regime: GmtcRegime::Binding,
            t1: eq.t1(),
            t2: eq.t2(),
            k1: c.k1,
            k2: c.k2,
            w1: c.w1,
            w2: c.w2,
            g: c.g,
            revenue1: eq.revenue(Country::One),
            revenue2: eq.revenue(Country::Two),
        })
    })
}

/// Labor-model equilibrium under a minimum tax.
///
/// # Safety
/// `econ` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gmtc_labor_nash_gmt(
    econ: *const GmtcLaborEconomy,
    t_m: f64,
    sigma: f64,
    out: *mut GmtcLaborEquilibrium,
) -> GmtcStatus {
    guarded(out, || {
        let e = &deref(econ, "labor economy")?.0;
        let policy = GmtPolicy::new(t_m, sigma).map_err(model_error)?;
        let eq = nash_labor_gmt(e, &policy).map_err(model_error)?;
        let c = eq.choice;
        Ok(GmtcLaborEquilibrium {
            regime: eq.regime.into(),
            t1: eq.taxes.t1,
            t2: eq.taxes.t2,
            k1: c.k1,
            k2: c.k2,
            w1: c.w1,
            w2: c.w2,
            g: c.g,
            revenue1: eq.revenue(Country::One),
            revenue2: eq.revenue(Country::Two),
        })
    })
}
