//! Scalar root finding and maximization shared by the solvers.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 2_000;

/// Root of `f` on `[lo, hi]` by bisection.
///
/// Requires opposite signs at the endpoints (a zero at an endpoint is accepted).
/// With `tol == 0` the interval is halved until it cannot shrink further.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed {
            what: what.to_string(),
            lo,
            hi,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= tol {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection in log space for positive brackets.
pub fn bisect_log<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let x = bisect(|u| f(u.exp()), lo.ln(), hi.ln(), rel_tol, what)?;
    Ok(x.exp())
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer of a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Returns `(argmax, max)`. Endpoints are compared at the end so a boundary
/// maximum is reported exactly.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (mut x, mut fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        let fe = f(end);
        if fe > fx {
            x = end;
            fx = fe;
        }
    }
    (x, fx)
}

/// Maximizer of `f` on `[lo, hi]`: a uniform scan locates the best cell,
/// then golden-section search refines inside the neighbouring cells.
pub fn scan_max<F>(mut f: F, lo: f64, hi: f64, cells: usize, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let cells = cells.max(2);
    let h = (hi - lo) / cells as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for j in 0..=cells {
        let v = f(lo + h * j as f64);
        if v > best_val {
            best_val = v;
            best = j;
        }
    }
    let a = lo + h * best.saturating_sub(1) as f64;
    let b = (lo + h * (best + 1).min(cells) as f64).min(hi);
    let (x, fx) = golden_max(&mut f, a, b, tol);
    if fx >= best_val {
        (x, fx)
    } else {
        (lo + h * best as f64, best_val)
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|j| if j + 1 == n { hi } else { lo + h * j as f64 })
                .collect()
        }
    }
}

/// Relative difference with an absolute floor of one.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0f64).max(a.abs()).max(b.abs())
}
