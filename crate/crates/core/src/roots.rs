//! Bracketed bisection for monotone scalar equations.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError<E> {
    #[error("no sign change in [{lower:e}, {upper:e}]")]
    BracketFailure { lower: f64, upper: f64 },
    #[error(transparent)]
    Eval(E),
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` by bisection.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them is zero).
/// Stops when the bracket is narrower than `x_tol` or stops shrinking.
pub fn bisect<F, E>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut f_lo = f(lo).map_err(RootError::Eval)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi).map_err(RootError::Eval)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::BracketFailure {
            lower: lo,
            upper: hi,
        });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid).map_err(RootError::Eval)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `f(x) = 0` for a function decreasing in `x > 0`, bisecting on `ln x`.
///
/// The initial bracket `[lo, hi]` is widened geometrically (by `10^4`
/// per step, down to `1e-300` and up to `1e300`) until it straddles a
/// sign change.
pub fn bisect_log_decreasing<F, E>(
    mut f: F,
    lo: f64,
    hi: f64,
    ln_tol: f64,
) -> Result<f64, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    bisect_decreasing_expanding(
        |u: f64| f(u.exp()),
        lo.ln(),
        hi.ln(),
        4.0 * std::f64::consts::LN_10,
        (1e-300f64.ln(), 1e300f64.ln()),
        ln_tol,
    )
    .map(f64::exp)
    .map_err(|e| match e {
        RootError::BracketFailure { lower, upper } => RootError::BracketFailure {
            lower: lower.exp(),
            upper: upper.exp(),
        },
        e => e,
    })
}

/// Solves `f(u) = 0` for a decreasing `f`, widening `[lo, hi]` by `step`
/// at a time within `limits` until it straddles a sign change.
pub fn bisect_decreasing_expanding<F, E>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    step: f64,
    limits: (f64, f64),
    tol: f64,
) -> Result<f64, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (floor, ceil) = limits;
    while f(lo).map_err(RootError::Eval)? < 0.0 {
        if lo <= floor {
            return Err(RootError::BracketFailure {
                lower: lo,
                upper: hi,
            });
        }
        hi = lo;
        lo = (lo - step).max(floor);
    }
    while f(hi).map_err(RootError::Eval)? > 0.0 {
        if hi >= ceil {
            return Err(RootError::BracketFailure {
                lower: lo,
                upper: hi,
            });
        }
        lo = hi;
        hi = (hi + step).min(ceil);
    }
    bisect(f, lo, hi, tol)
}
