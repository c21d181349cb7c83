//! Dormand–Prince 5(4) stepping shared by the radial and time integrators.
//!
//! Callers own their step loops (event handling differs too much between
//! the two uses); this module supplies the single step, the error norm and
//! the step-size controller.

/// Mixed relative/absolute error tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub const fn new(rtol: f64, atol: f64) -> Self {
        Tolerance { rtol, atol }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub y: [f64; N],
    /// Right-hand side at the new point (first stage of the next step).
    pub dy: [f64; N],
    pub err: [f64; N],
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `dy = rhs(t, y)`.
pub fn dopri5_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    dy: &[f64; N],
    h: f64,
) -> Step<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = dy;
    let k2 = rhs(t + C2 * h, &comb(y, h, &[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(t + h, &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Step { y: y_new, dy: k7, err }
}

/// Scaled RMS error; a step is acceptable when this is at most 1.
pub fn error_norm<const N: usize>(y0: &[f64; N], step: &Step<N>, tol: Tolerance) -> f64 {
    let mut sum = 0.0;
    for ((y0, y1), err) in y0.iter().zip(&step.y).zip(&step.err) {
        let scale = tol.atol + tol.rtol * y0.abs().max(y1.abs());
        let e = err / scale;
        sum += e * e;
    }
    libm::sqrt(sum / N as f64)
}

/// Step-size multiplier for the next attempt after a step with error `err`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
}

/// Cubic Hermite interpolation on `[x0, x1]` from values and slopes.
#[inline]
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return y0;
    }
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

/// Derivative of [`hermite`] with respect to `x`.
#[inline]
pub fn hermite_slope(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return d0;
    }
    let s = (x - x0) / h;
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (3.0 * s2 - 2.0 * s) * d1
}
