//! Radial Cauchy problems `u'' + (2/r) u' = h(u)` integrated outward.
//!
//! The state is `(u, u', w)` where `w' = S(u) r²` accumulates the growth
//! integral alongside the profile. A start at the regular center `r = 0`
//! takes its first step from the Taylor series.

use alloc::vec::Vec;

use crate::error::{Result, SolveError};
use crate::ode::{dopri5_step, error_norm, hermite, step_factor, Step, Tolerance};

/// Default integrator tolerance for radial arcs.
pub const RADIAL_TOL: Tolerance = Tolerance::new(1e-10, 1e-12);

const MAX_STEPS: usize = 2_000_000;
/// Relative width to which threshold crossings are bisected on the interpolant.
const LOCATE_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopMode {
    /// Stop where `u` first reaches the given concentration.
    UntilValue(f64),
    /// Stop at the given radius.
    UntilRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCondition {
    pub mode: StopMode,
    /// Hard cap on the radius; `None` picks a multiple of the natural length.
    pub cap: Option<f64>,
}

impl StopCondition {
    pub fn until_value(target: f64) -> Self {
        StopCondition { mode: StopMode::UntilValue(target), cap: None }
    }

    pub fn until_radius(radius: f64) -> Self {
        StopCondition { mode: StopMode::UntilRadius(radius), cap: None }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    HitThreshold { value: f64, r: f64 },
    ReachedRadius { r: f64 },
}

/// Initial data `u(r0) = u0`, `u'(r0) = du0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialStart {
    pub r0: f64,
    pub u0: f64,
    pub du0: f64,
}

impl RadialStart {
    pub fn center(u0: f64) -> Self {
        RadialStart { r0: 0.0, u0, du0: 0.0 }
    }
}

/// A solved arc on an increasing radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    ddu: Vec<f64>,
    growth: Vec<f64>,
    stop_reason: StopReason,
}

impl RadialSolution {
    pub fn r_grid(&self) -> &[f64] {
        &self.r
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    /// `u''` at each grid point, from the equation.
    pub fn ddu(&self) -> &[f64] {
        &self.ddu
    }

    /// Running value of `∫ S(u) τ² dτ` from the start radius.
    pub fn growth(&self) -> &[f64] {
        &self.growth
    }

    pub fn growth_integral(&self) -> f64 {
        *self.growth.last().unwrap()
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    pub fn start(&self) -> f64 {
        self.r[0]
    }

    pub fn end(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn end_value(&self) -> f64 {
        *self.u.last().unwrap()
    }

    pub fn end_flux(&self) -> f64 {
        *self.du.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn segment(&self, r: f64) -> Result<usize> {
        let (lo, hi) = (self.start(), self.end());
        let slop = 1e-12 * hi.abs().max(1e-300);
        if !(r >= lo - slop && r <= hi + slop) {
            return Err(SolveError::OutOfRange { r, lo, hi });
        }
        let i = self.r.partition_point(|&x| x <= r);
        Ok(i.clamp(1, self.r.len().max(2) - 1) - 1)
    }

    /// Interpolated concentration.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        if self.r.len() == 1 {
            self.segment(r)?;
            return Ok(self.u[0]);
        }
        let i = self.segment(r)?;
        let r = r.clamp(self.start(), self.end());
        Ok(hermite(
            self.r[i],
            self.r[i + 1],
            self.u[i],
            self.u[i + 1],
            self.du[i],
            self.du[i + 1],
            r,
        ))
    }

    /// Interpolated radial derivative `u'(r)`.
    pub fn flux_at(&self, r: f64) -> Result<f64> {
        if self.r.len() == 1 {
            self.segment(r)?;
            return Ok(self.du[0]);
        }
        let i = self.segment(r)?;
        let r = r.clamp(self.start(), self.end());
        Ok(hermite(
            self.r[i],
            self.r[i + 1],
            self.du[i],
            self.du[i + 1],
            self.ddu[i],
            self.ddu[i + 1],
            r,
        )
        .max(0.0))
    }

    fn push(&mut self, r: f64, y: &[f64; 3], dy: &[f64; 3]) {
        self.r.push(r);
        self.u.push(y[0]);
        self.du.push(y[1]);
        self.ddu.push(dy[1]);
        self.growth.push(y[2]);
    }
}

/// Natural length scale `sqrt(u / h(u))` of the arc, or 1 when `h(u) ≤ 0`.
fn length_scale(u0: f64, h0: f64) -> f64 {
    if h0 > 0.0 && u0 > 0.0 {
        libm::sqrt(u0 / h0)
    } else {
        1.0
    }
}

/// Integrates `u'' + (2/r) u' = h(u)` from `start` until `stop`, carrying
/// `∫ growth(u) r² dr` as a third state.
pub fn integrate_radial<H, G>(
    h: H,
    growth: G,
    start: RadialStart,
    stop: StopCondition,
    tol: Tolerance,
) -> Result<RadialSolution>
where
    H: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let RadialStart { r0, u0, du0 } = start;
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(SolveError::InvalidStart { detail: "start radius must be finite and >= 0" });
    }
    if !(u0 > 0.0) || !u0.is_finite() {
        return Err(SolveError::InvalidStart { detail: "start value must be positive" });
    }
    if !(du0 >= 0.0) || !du0.is_finite() {
        return Err(SolveError::InvalidStart { detail: "start slope must be nonnegative" });
    }
    if r0 == 0.0 && du0 != 0.0 {
        return Err(SolveError::InvalidStart { detail: "a center start needs zero slope" });
    }
    match stop.mode {
        StopMode::UntilValue(target) if !(target > u0) => {
            return Err(SolveError::NonMonotoneTarget { target, start: u0 });
        }
        StopMode::UntilRadius(rt) if !(rt >= r0) || !rt.is_finite() => {
            return Err(SolveError::InvalidStart { detail: "target radius below the start" });
        }
        _ => {}
    }

    let h0 = h(u0);
    let scale = length_scale(u0, h0);
    let cap = match (stop.cap, stop.mode) {
        (Some(c), _) => c,
        (None, StopMode::UntilRadius(rt)) => rt,
        (None, StopMode::UntilValue(target)) => {
            r0 + 1e3 * (scale * (1.0 + libm::log(target / u0))).max(1.0)
        }
    };

    let rhs = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let hu = h(y[0]);
        let curvature = if r > 0.0 { hu - 2.0 * y[1] / r } else { hu / 3.0 };
        [y[1], curvature, growth(y[0]) * r * r]
    };

    let mut sol = RadialSolution {
        r: Vec::new(),
        u: Vec::new(),
        du: Vec::new(),
        ddu: Vec::new(),
        growth: Vec::new(),
        stop_reason: StopReason::ReachedRadius { r: r0 },
    };
    let mut r = r0;
    let mut y = [u0, du0, 0.0];
    let mut dy = rhs(r, &y);
    sol.push(r, &y, &dy);

    if stop.mode == StopMode::UntilRadius(r0) {
        return Ok(sol);
    }

    if r0 == 0.0 {
        // u(δ) = u0 + h δ²/6, u'(δ) = h δ/3, w(δ) = S(u0) δ³/3
        let mut delta = 1e-6 * scale.max(1.0);
        let mut reason = None;
        match stop.mode {
            StopMode::UntilRadius(rt) if rt <= delta => {
                delta = rt;
                reason = Some(StopReason::ReachedRadius { r: rt });
            }
            StopMode::UntilValue(target) if h0 > 0.0 && u0 + h0 * delta * delta / 6.0 >= target => {
                delta = libm::sqrt(6.0 * (target - u0) / h0);
                reason = Some(StopReason::HitThreshold { value: target, r: delta });
            }
            _ => {}
        }
        r = delta;
        y = [
            u0 + h0 * delta * delta / 6.0,
            h0 * delta / 3.0,
            growth(u0) * delta * delta * delta / 3.0,
        ];
        if let Some(StopReason::HitThreshold { value, .. }) = reason {
            y[0] = value;
        }
        dy = rhs(r, &y);
        sol.push(r, &y, &dy);
        if let Some(reason) = reason {
            sol.stop_reason = reason;
            return Ok(sol);
        }
    }

    let mut step_h = 0.05 * scale;
    let mut rhs_mut = rhs;
    for _ in 0..MAX_STEPS {
        let mut last = false;
        if let StopMode::UntilRadius(rt) = stop.mode {
            if r + step_h >= rt - 1e-14 * rt {
                step_h = rt - r;
                last = true;
            }
        }
        if r + step_h > cap {
            step_h = cap - r;
        }
        let step = dopri5_step(&mut rhs_mut, r, &y, &dy, step_h);
        let err = if step.y.iter().chain(step.dy.iter()).all(|v| v.is_finite()) {
            error_norm(&y, &step, tol)
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            let r_new = match stop.mode {
                StopMode::UntilRadius(rt) if last => rt,
                _ => r + step_h,
            };
            if let StopMode::UntilValue(target) = stop.mode {
                if step.y[0] >= target {
                    let (r_hit, hit) =
                        locate_crossing(&mut rhs_mut, r, &y, &dy, r_new, &step, target);
                    sol.push(r_hit, &hit.y, &hit.dy);
                    sol.stop_reason = StopReason::HitThreshold { value: target, r: r_hit };
                    return Ok(sol);
                }
            }
            r = r_new;
            y = step.y;
            dy = step.dy;
            sol.push(r, &y, &dy);
            if last {
                sol.stop_reason = StopReason::ReachedRadius { r };
                return Ok(sol);
            }
            if r >= cap {
                return Err(SolveError::CapExceeded { cap, value: y[0] });
            }
            step_h *= step_factor(err);
        } else {
            step_h *= if err.is_finite() { step_factor(err) } else { 0.2 };
            if step_h <= 1e-14 * r.max(scale) {
                return Err(SolveError::StepSizeUnderflow { at: r });
            }
        }
    }
    Err(SolveError::TooManySteps { at: r })
}

/// Locates `u = target` inside an accepted step: bisection on the cubic
/// Hermite interpolant, then Newton refinement with partial steps taken
/// from the left end so the result carries the full step accuracy.
fn locate_crossing<F>(
    rhs: &mut F,
    r0: f64,
    y0: &[f64; 3],
    dy0: &[f64; 3],
    r1: f64,
    step: &Step<3>,
    target: f64,
) -> (f64, Step<3>)
where
    F: FnMut(f64, &[f64; 3]) -> [f64; 3],
{
    let (mut lo, mut hi) = (r0, r1);
    while hi - lo > LOCATE_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        let u = hermite(r0, r1, y0[0], step.y[0], y0[1], step.y[1], mid);
        if u < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    let mut best = dopri5_step(rhs, r0, y0, dy0, r - r0);
    for _ in 0..8 {
        let resid = best.y[0] - target;
        if resid.abs() <= 2.0 * f64::EPSILON * target || !(best.y[1] > 0.0) {
            break;
        }
        let next = (r - resid / best.y[1]).clamp(r0, r1);
        if next == r {
            break;
        }
        r = next;
        best = dopri5_step(rhs, r0, y0, dy0, r - r0);
    }
    (r, best)
}

/// `u0 sinh(√λ r) / (√λ r)`: the center solution of `Δu = λu`.
pub fn closed_form_linear_center(lambda: f64, u0: f64, r: f64) -> f64 {
    let x = libm::sqrt(lambda) * r;
    if x < 1e-4 {
        let x2 = x * x;
        u0 * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        u0 * libm::sinh(x) / x
    }
}

/// Solution of `Δu = λu` with `u(ρ) = u0`, `u'(ρ) = 0`.
pub fn closed_form_linear_annulus(lambda: f64, rho: f64, u0: f64, r: f64) -> f64 {
    let k = libm::sqrt(lambda);
    let s = r - rho;
    u0 * (rho * libm::cosh(k * s) + libm::sinh(k * s) / k) / r
}
