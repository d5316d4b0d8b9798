//! Scalar root finding on bracketing intervals.
//!
//! Every equation solved in this crate carries negative powers of the
//! unknown, so plain Newton iteration can jump out of the admissible
//! interval. The solver here bisects until the bracket is narrow and only
//! then lets Newton polish the last few digits, rejecting any step that
//! leaves the bracket or fails to reduce the residual.

use crate::error::{Error, Result};

/// Bracket width (relative to the magnitude of the bracket) at which
/// bisection hands over to Newton polishing.
pub const BISECTION_WIDTH: f64 = 1e-14;

const MAX_BISECTIONS: usize = 400;
const MAX_POLISH: usize = 8;

fn different_signs(a: f64, b: f64) -> bool {
    (a < 0.0) != (b < 0.0)
}

/// Finds a root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// `df` is the derivative, used only in the final polish.
pub fn bisect_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(Error::NoBracket(format!("empty interval [{lo}, {hi}]")));
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !f_lo.is_finite() || !f_hi.is_finite() || !different_signs(f_lo, f_hi) {
        return Err(Error::NoBracket(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }

    for _ in 0..MAX_BISECTIONS {
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if hi - lo <= BISECTION_WIDTH * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if different_signs(f_lo, f_mid) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..MAX_POLISH {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let f_next = f(next);
        if !(f_next.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = f_next;
    }
    Ok(x)
}

/// Splits `[lo, hi]` into `intervals` equal pieces and returns every piece
/// whose endpoint values differ in sign.
pub fn sign_change_brackets<F>(f: F, lo: f64, hi: f64, intervals: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let step = (hi - lo) / intervals as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=intervals {
        let b = if k == intervals { hi } else { lo + step * k as f64 };
        let fb = f(b);
        let hit = fb == 0.0 || (k == 1 && fa == 0.0) || (fa != 0.0 && different_signs(fa, fb));
        if fa.is_finite() && fb.is_finite() && hit {
            out.push((a, b));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Plain bisection for a monotone predicate-style search, used where no
/// derivative is available. Returns the midpoint of the final bracket.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !different_signs(f_lo, f_hi) {
        return Err(Error::NoBracket(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if different_signs(f_lo, f_mid) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
