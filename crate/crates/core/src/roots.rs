//! Bracketed scalar root finding (bisection safeguarded inverse-quadratic
//! interpolation, after Brent's `zeroin`).

use crate::error::{Result, SolveError};

/// Termination tolerance on the root location: `max(abs, rel·|x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTol {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl RootTol {
    pub const fn relative(rel: f64, scale: f64) -> Self {
        RootTol { rel, abs: rel * scale, max_iter: 300 }
    }
}

impl Default for RootTol {
    fn default() -> Self {
        RootTol { rel: 1e-12, abs: 1e-300, max_iter: 300 }
    }
}

#[inline]
fn same_sign(a: f64, b: f64) -> bool {
    (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)
}

/// Finds a root of `f` in `[a, b]` given `fa = f(a)` and `fb = f(b)` of
/// opposite sign (or one of them zero).
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, tol: RootTol) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if same_sign(fa, fb) || fa.is_nan() || fb.is_nan() {
        return Err(SolveError::NoSignChange { a, fa, b, fb });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if same_sign(fb, fc) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.abs.max(tol.rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        if fb.is_nan() {
            return Err(SolveError::NonFinite { at: b });
        }
    }
    Err(SolveError::MaxIterations)
}

/// Doubles `hi` (starting from `hi0 > lo`) until `f(hi)` differs in sign
/// from `f_lo`, giving up past `limit`. Returns the bracket end and its value.
pub fn expand_upward<F>(mut f: F, f_lo: f64, hi0: f64, limit: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut hi = hi0;
    loop {
        let fh = f(hi)?;
        if !same_sign(fh, f_lo) {
            return Ok((hi, fh));
        }
        if hi > limit {
            return Err(SolveError::BracketNotFound { lo: hi0, hi });
        }
        hi *= 2.0;
    }
}
