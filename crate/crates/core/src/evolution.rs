//! Time evolution of the tumor radius, `R'(t) = R·F(R, σ̄)`, with tracking
//! of the structural state and its transitions.
//!
//! The integrated variable is `x = ln R`, so `x' = F(e^x, σ̄)`. This keeps
//! relative accuracy uniform as `R` grows or shrinks by many decades and
//! makes the fully necrotic case (`F ≡ −ν2/3`) exact.

use alloc::vec::Vec;
use core::cell::Cell;

use crate::error::{Result, SolveError};
use crate::interfaces::{Model, Regime, Supply};
use crate::ode::{dopri5_step, error_norm, hermite, step_factor, Tolerance};

/// Error tolerance on `ln R`.
pub const EVOLVE_TOL: Tolerance = Tolerance::new(1e-10, 1e-12);
/// Relative accuracy of transition times.
pub const EVENT_RTOL: f64 = 1e-10;
/// `R / R0` below which a shrinking tumor is declared extinct.
pub const EXTINCTION_RATIO: f64 = 1e-12;
/// Radius agreement required to report convergence to the dormant state.
pub const CONVERGENCE_RTOL: f64 = 1e-9;
/// Bound on `|R'|` at convergence.
pub const RHS_EPS: f64 = 1e-12;

const MAX_STEPS: usize = 1_000_000;
const STIFF_PROBE: f64 = 1e-6;
const STIFF_LIMIT: f64 = 2.0;

/// The six structural states of a tumor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureState {
    ProliferatingOne,
    ProliferatingQuiescentTwo,
    ProliferatingQuiescentNecroticThree,
    QuiescentOne,
    QuiescentNecroticTwo,
    NecroticOne,
}

impl StructureState {
    pub fn as_str(self) -> &'static str {
        match self {
            StructureState::ProliferatingOne => "proliferating_one",
            StructureState::ProliferatingQuiescentTwo => "proliferating_quiescent_two",
            StructureState::ProliferatingQuiescentNecroticThree => {
                "proliferating_quiescent_necrotic_three"
            }
            StructureState::QuiescentOne => "quiescent_one",
            StructureState::QuiescentNecroticTwo => "quiescent_necrotic_two",
            StructureState::NecroticOne => "necrotic_one",
        }
    }

    pub fn layer_count(self) -> usize {
        match self {
            StructureState::ProliferatingOne
            | StructureState::QuiescentOne
            | StructureState::NecroticOne => 1,
            StructureState::ProliferatingQuiescentTwo | StructureState::QuiescentNecroticTwo => 2,
            StructureState::ProliferatingQuiescentNecroticThree => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub state: StructureState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub from: StructureState,
    pub to: StructureState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    ConvergedToStationary { r_s: f64 },
    Extinguishing,
    TimeBudgetReached,
}

impl Terminal {
    pub fn as_str(&self) -> &'static str {
        match self {
            Terminal::ConvergedToStationary { .. } => "converged_to_stationary",
            Terminal::Extinguishing => "extinguishing",
            Terminal::TimeBudgetReached => "time_budget_reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn transition_times(&self) -> Vec<Event> {
        transition_times(self)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().unwrap()
    }
}

/// The transitions recorded in `traj`, in time order.
pub fn transition_times(traj: &Trajectory) -> Vec<Event> {
    traj.events.clone()
}

impl Supply<'_> {
    /// Critical radii that split this regime, ascending.
    fn split_radii(&self) -> Vec<f64> {
        let r = self.radii();
        [r.r_q_star, r.r_sub_star, r.r_star].into_iter().flatten().collect()
    }

    fn state_at_level(&self, level: usize) -> StructureState {
        use StructureState::*;
        match (self.regime(), level) {
            (Regime::Necrotic, _) => NecroticOne,
            (Regime::Quiescent, 0) => QuiescentOne,
            (Regime::Quiescent, _) => QuiescentNecroticTwo,
            (Regime::Proliferating, 0) => ProliferatingOne,
            (Regime::Proliferating, 1) => ProliferatingQuiescentTwo,
            (Regime::Proliferating, _) => ProliferatingQuiescentNecroticThree,
        }
    }

    /// Structural state of the tumor of radius `R`. A radius equal to a
    /// critical radius belongs to the state with fewer layers.
    pub fn classify_structure(&self, radius: f64) -> StructureState {
        let level = self.split_radii().iter().filter(|&&rc| radius > rc).count();
        self.state_at_level(level)
    }

    fn sample(&self, t: f64, r: f64) -> Result<Sample> {
        let (rho, eta) = self.inner_boundaries(r)?;
        Ok(Sample { t, r, rho, eta, state: self.classify_structure(r) })
    }

    /// Integrates the radius from `R0` over `[0, t_end]`, sampling every
    /// `sample_dt` and at every transition.
    pub fn evolve(&self, r0: f64, t_end: f64, sample_dt: f64) -> Result<Trajectory> {
        let valid = |v: f64| v > 0.0 && v.is_finite();
        if !(valid(r0) && valid(t_end) && valid(sample_dt)) {
            return Err(SolveError::NonPositiveInputs);
        }
        let model = self.model();
        let extinguishable = self.sigma_bar() <= model.rates().sigma_tilde();
        let splits = self.split_radii();
        let ln_splits: Vec<f64> = splits.iter().map(|r| libm::log(*r)).collect();

        let failure: Cell<Option<SolveError>> = Cell::new(None);
        let mut rhs = |_t: f64, x: &[f64; 1]| -> [f64; 1] {
            match self.growth(libm::exp(x[0])) {
                Ok(v) => [v],
                Err(e) => {
                    if failure.get().is_none() {
                        failure.set(Some(e));
                    }
                    [f64::NAN]
                }
            }
        };

        let mut samples = Vec::new();
        let mut events = Vec::new();
        samples.push(self.sample(0.0, r0)?);

        let (mut t, mut x) = (0.0, [libm::log(r0)]);
        let mut dx = rhs(t, &x);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let mut h = t_end.min(1e-2);
        let mut next_grid = 1usize;
        let mut extinct = false;
        let mut steps = 0usize;

        while t < t_end && !extinct {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(SolveError::TooManySteps { at: t });
            }
            let last = h >= t_end - t;
            if last {
                h = t_end - t;
            }
            let step = dopri5_step(&mut rhs, t, &x, &dx, h);
            if let Some(e) = failure.take() {
                return Err(e);
            }
            let err = error_norm(&x, &step, EVOLVE_TOL);
            if !err.is_finite() {
                return Err(SolveError::NonFinite { at: t });
            }
            if err > 1.0 {
                h *= step_factor(err);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(SolveError::StepSizeUnderflow { at: t });
                }
                continue;
            }
            let t1 = if last { t_end } else { t + h };
            let (x0, d0, x1, d1) = (x[0], dx[0], step.y[0], step.dy[0]);

            // re-step from the accepted left end to an interior time
            let mut restep = |tau: f64| -> Result<(f64, f64)> {
                if tau == t1 {
                    return Ok((x1, d1));
                }
                let s = dopri5_step(&mut rhs, t, &[x0], &[d0], tau - t);
                match failure.take() {
                    Some(e) => Err(e),
                    None => Ok((s.y[0], s.dy[0])),
                }
            };

            let ln_floor = libm::log(EXTINCTION_RATIO * r0);
            let t_stop = if extinguishable && x1 < ln_floor {
                extinct = true;
                locate(&mut restep, (t, x0, d0), (t1, x1, d1), ln_floor)?
            } else {
                t1
            };

            // (time, radius, is_event)
            let mut pending: Vec<(f64, f64, Option<Event>)> = Vec::new();
            let level0 = ln_splits.iter().filter(|&&l| x0 > l).count();
            let level1 = ln_splits.iter().filter(|&&l| x1 > l).count();
            if level0 != level1 {
                let mut crossings: Vec<(f64, usize)> = Vec::new();
                for (k, &l) in ln_splits.iter().enumerate() {
                    if (x0 > l) != (x1 > l) {
                        crossings.push((locate(&mut restep, (t, x0, d0), (t1, x1, d1), l)?, k));
                    }
                }
                crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut level = level0;
                for (tc, k) in crossings {
                    if tc > t_stop {
                        break;
                    }
                    let next = if level1 > level0 { k + 1 } else { k };
                    let ev = Event {
                        t: tc,
                        from: self.state_at_level(level),
                        to: self.state_at_level(next),
                    };
                    if ev.from != ev.to {
                        pending.push((tc, splits[k], Some(ev)));
                    }
                    level = next;
                }
            }
            while (next_grid as f64) * sample_dt <= t_stop {
                let tg = next_grid as f64 * sample_dt;
                next_grid += 1;
                if tg <= t {
                    continue;
                }
                let (xg, _) = restep(tg)?;
                pending.push((tg, libm::exp(xg), None));
            }
            if extinct {
                let (xs, _) = restep(t_stop)?;
                pending.push((t_stop, libm::exp(xs), None));
            } else if last {
                pending.push((t1, libm::exp(x1), None));
            }
            pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.2.is_some().cmp(&a.2.is_some())));
            for (ts, rs, ev) in pending {
                if let Some(ev) = ev {
                    events.push(ev);
                }
                if samples.last().is_some_and(|s: &Sample| s.t >= ts) {
                    continue;
                }
                let mut smp = self.sample(ts, rs)?;
                if let Some(ev) = ev {
                    smp.state = self.classify_structure(rs);
                    debug_assert!(smp.state == ev.from || smp.state == ev.to);
                }
                samples.push(smp);
            }

            t = t1;
            x = step.y;
            dx = step.dy;
            h *= step_factor(err);
            // explicit stability: h·|∂F/∂x| ≤ STIFF_LIMIT, else the step sits
            // on the stability boundary and errors near equilibrium stall
            let probe = rhs(t, &[x[0] + STIFF_PROBE]);
            if let Some(e) = failure.take() {
                return Err(e);
            }
            let jac = ((probe[0] - dx[0]) / STIFF_PROBE).abs();
            if jac > 0.0 {
                h = h.min(STIFF_LIMIT / jac);
            }
        }

        let terminal = if extinct {
            Terminal::Extinguishing
        } else if extinguishable {
            Terminal::TimeBudgetReached
        } else {
            let cv = model.critical_values()?;
            let r_s = self.stationary(&cv)?.kind.radius().unwrap();
            let r_end = libm::exp(x[0]);
            let close = (r_end - r_s).abs() <= CONVERGENCE_RTOL * r_s;
            let still = (r_end * dx[0]).abs() <= RHS_EPS;
            if close && still {
                Terminal::ConvergedToStationary { r_s }
            } else {
                Terminal::TimeBudgetReached
            }
        };
        Ok(Trajectory { samples, events, terminal })
    }
}

/// Time in `[t0, t1]` where `x` crosses `target`: bisection on the cubic
/// Hermite interpolant, then Newton steps on re-integrated values.
fn locate<R>(
    restep: &mut R,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    target: f64,
) -> Result<f64>
where
    R: FnMut(f64) -> Result<(f64, f64)>,
{
    let (t0, x0, d0) = left;
    let (t1, x1, d1) = right;
    let rising = x1 > x0;
    let above = |x: f64| if rising { x > target } else { x <= target };
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > 1e-13 * hi.abs().max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(hermite(t0, t1, x0, x1, d0, d1, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut tc = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (xc, dc) = restep(tc)?;
        if dc == 0.0 {
            break;
        }
        let dt = (xc - target) / dc;
        let next = (tc - dt).clamp(t0, t1);
        let done = (next - tc).abs() <= EVENT_RTOL * 1e-3 * next.abs().max(1e-300);
        tc = next;
        if done {
            break;
        }
    }
    Ok(tc)
}

impl Model {
    /// `R·F(R, σ̄)`
    pub fn radius_rhs(&self, radius: f64, sigma_bar: f64) -> Result<f64> {
        self.supply(sigma_bar)?.radius_rhs(radius)
    }

    pub fn classify_structure(&self, radius: f64, sigma_bar: f64) -> Result<StructureState> {
        Ok(self.supply(sigma_bar)?.classify_structure(radius))
    }

    pub fn evolve(
        &self,
        r0: f64,
        sigma_bar: f64,
        t_end: f64,
        sample_dt: f64,
    ) -> Result<Trajectory> {
        self.supply(sigma_bar)?.evolve(r0, t_end, sample_dt)
    }
}
