//! The growth functional `F(R, σ̄)`, the critical supplies `σ*` and `σ_*`,
//! and the dormant (stationary) solutions they classify.

use crate::error::{Result, SolveError};
use crate::interfaces::{Model, Regime, Shape, ShotEnd, Supply, ROOT_RTOL};
use crate::roots::{brent, expand_upward, RootTol};

/// Upper end of the bracket search for a critical supply, as a multiple
/// of `σ̃`.
pub const CRITICAL_SEARCH_LIMIT: f64 = 1e6;

/// `σ*` separates two- and three-layer dormant tumors, `σ_*` one- and
/// two-layer ones. Always `σ̃ < σ_* < σ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub sigma_star: f64,
    pub sigma_sub_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryKind {
    Trivial,
    OneLayer { r_s: f64 },
    TwoLayer { eta_s: f64, r_s: f64 },
    ThreeLayer { rho_s: f64, eta_s: f64, r_s: f64 },
}

impl StationaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StationaryKind::Trivial => "trivial",
            StationaryKind::OneLayer { .. } => "one_layer",
            StationaryKind::TwoLayer { .. } => "two_layer",
            StationaryKind::ThreeLayer { .. } => "three_layer",
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            StationaryKind::Trivial => None,
            StationaryKind::OneLayer { r_s }
            | StationaryKind::TwoLayer { r_s, .. }
            | StationaryKind::ThreeLayer { r_s, .. } => Some(r_s),
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match *self {
            StationaryKind::TwoLayer { eta_s, .. } | StationaryKind::ThreeLayer { eta_s, .. } => {
                Some(eta_s)
            }
            _ => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            StationaryKind::ThreeLayer { rho_s, .. } => Some(rho_s),
            _ => None,
        }
    }
}

/// A dormant tumor. `residual` is `|F(R_s, σ̄)|` re-evaluated from the
/// radius, zero for the trivial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryState {
    pub kind: StationaryKind,
    pub residual: f64,
}

/// Bounds `lo ≤ F(R, σ̄) ≤ hi` over all radii.
///
/// Below `σ_Q` no cell proliferates, so `F ≤ −ν1/3` there and the upper
/// bound is capped accordingly.
pub fn growth_bounds(model: &Model, sigma_bar: f64) -> (f64, f64) {
    let th = model.thresholds();
    let s = model.rates().s(sigma_bar);
    let hi = if sigma_bar > th.sigma_q { s } else { s.max(-th.nu1) };
    (-th.nu2 / 3.0, hi / 3.0)
}

impl Supply<'_> {
    /// `F(R, σ̄)`, the growth rate per unit volume of the profile of radius `R`.
    pub fn growth(&self, radius: f64) -> Result<f64> {
        let th = self.model().thresholds();
        let shape = self.solve_shape(radius)?;
        match shape {
            Shape::Necrotic => return Ok(-th.nu2 / 3.0),
            Shape::Quiescent { .. } => return Ok(-th.nu1 / 3.0),
            _ => {}
        }
        let shot = self.shoot(shape, ShotEnd::AtRadius(radius))?;
        Ok(shot.numerator / (radius * radius * radius))
    }

    /// `R·F(R, σ̄)`
    pub fn radius_rhs(&self, radius: f64) -> Result<f64> {
        Ok(radius * self.growth(radius)?)
    }

    fn require_proliferating(&self) -> Result<()> {
        if self.regime() != Regime::Proliferating {
            let sigma_q = self.model().thresholds().sigma_q;
            return Err(SolveError::SigmaBelowQuiescent { sigma_bar: self.sigma_bar(), sigma_q });
        }
        Ok(())
    }

    /// `𝒢(σ̄) = F(R*(σ̄), σ̄)`
    pub fn g_functional(&self) -> Result<f64> {
        self.require_proliferating()?;
        let th = self.model().thresholds();
        let es = self.radii().eta_star;
        let r = self.radii().r_star.unwrap();
        Ok((self.star_growth() - th.nu1 * es * es * es / 3.0) / (r * r * r))
    }

    /// `ℱ(σ̄) = F(R_*(σ̄), σ̄)`
    pub fn fcal_functional(&self) -> Result<f64> {
        self.require_proliferating()?;
        let r = self.radii().r_sub_star.unwrap();
        Ok(self.sub_star_growth() / (r * r * r))
    }

    /// `F` along a branch, as a function of the branch's shooting parameter.
    fn branch_growth(&self, shape: Shape) -> Result<(f64, f64)> {
        let shot = self.shoot(shape, ShotEnd::AtValue)?;
        let r = shot.end;
        Ok((shot.numerator / (r * r * r), r))
    }

    /// The dormant solution at this supply, classified against `cv`.
    pub fn stationary(&self, cv: &CriticalValues) -> Result<StationaryState> {
        let model = self.model();
        let th = *model.thresholds();
        let sb = self.sigma_bar();
        if sb <= model.rates().sigma_tilde() {
            return Ok(StationaryState { kind: StationaryKind::Trivial, residual: 0.0 });
        }
        let radii = *self.radii();
        let kind = if sb <= cv.sigma_sub_star {
            // F increases with the center value; F → S(σ̄)/3 > 0 as c → σ̄
            let f_lo = self.fcal_functional()?;
            let center = if f_lo >= 0.0 {
                th.sigma_q
            } else {
                let resid = |c: f64| Ok(self.branch_growth(Shape::Proliferating { center: c })?.0);
                let s_top = model.rates().s(sb) / 3.0;
                brent(resid, th.sigma_q, sb, f_lo, s_top, RootTol::relative(ROOT_RTOL, sb))?
            };
            let r_s = if center == th.sigma_q {
                radii.r_sub_star.unwrap()
            } else {
                self.branch_growth(Shape::Proliferating { center })?.1
            };
            StationaryKind::OneLayer { r_s }
        } else if sb <= cv.sigma_star {
            // c = σ_D gives R*, c = σ_Q gives R_*
            let g = self.g_functional()?;
            let f = self.fcal_functional()?;
            let center = if g >= 0.0 {
                th.sigma_d
            } else if f <= 0.0 {
                th.sigma_q
            } else {
                let resid =
                    |c: f64| Ok(self.branch_growth(Shape::ProliferatingQuiescent { center: c })?.0);
                brent(
                    resid,
                    th.sigma_d,
                    th.sigma_q,
                    g,
                    f,
                    RootTol::relative(ROOT_RTOL, th.sigma_q),
                )?
            };
            let shot = self.shoot(Shape::ProliferatingQuiescent { center }, ShotEnd::AtValue)?;
            let r_s = match center {
                c if c == th.sigma_d => radii.r_star.unwrap(),
                c if c == th.sigma_q => radii.r_sub_star.unwrap(),
                _ => shot.end,
            };
            StationaryKind::TwoLayer { eta_s: shot.eta.unwrap(), r_s }
        } else {
            let g = self.g_functional()?;
            let rho = if g <= 0.0 {
                0.0
            } else {
                let resid = |rho: f64| Ok(self.branch_growth(Shape::ThreeLayer { rho })?.0);
                let r_star = radii.r_star.unwrap();
                let (hi, f_hi) = expand_upward(resid, g, r_star, 1e12 * r_star)?;
                let lo = if hi > r_star { 0.5 * hi } else { 0.0 };
                let f_lo = if lo == 0.0 { g } else { resid(lo)? };
                brent(resid, lo, hi, f_lo, f_hi, RootTol::relative(ROOT_RTOL, hi))?
            };
            let shot = self.shoot(Shape::ThreeLayer { rho }, ShotEnd::AtValue)?;
            let r_s = if rho == 0.0 { radii.r_star.unwrap() } else { shot.end };
            StationaryKind::ThreeLayer { rho_s: rho, eta_s: shot.eta.unwrap(), r_s }
        };
        let residual = self.growth(kind.radius().unwrap())?.abs();
        Ok(StationaryState { kind, residual })
    }
}

impl Model {
    /// `F(R, σ̄)`
    pub fn growth_functional(&self, radius: f64, sigma_bar: f64) -> Result<f64> {
        self.supply(sigma_bar)?.growth(radius)
    }

    pub fn g_functional(&self, sigma_bar: f64) -> Result<f64> {
        self.supply(sigma_bar)?.g_functional()
    }

    pub fn fcal_functional(&self, sigma_bar: f64) -> Result<f64> {
        self.supply(sigma_bar)?.fcal_functional()
    }

    /// Root of an increasing functional of `σ̄` on `(σ̃, ∞)`.
    fn critical_root<F>(&self, functional: F) -> Result<f64>
    where
        F: Fn(&Supply<'_>) -> Result<f64>,
    {
        let st = self.rates().sigma_tilde();
        let eval = |s: f64| functional(&self.supply(s)?);
        let f_lo = eval(st)?;
        if f_lo >= 0.0 {
            return Err(SolveError::BracketNotFound { lo: st, hi: st });
        }
        let (hi, f_hi) = expand_upward(eval, f_lo, 2.0 * st, CRITICAL_SEARCH_LIMIT * st)?;
        let lo = if hi > 2.0 * st { 0.5 * hi } else { st };
        let f_lo = if lo == st { f_lo } else { eval(lo)? };
        brent(eval, lo, hi, f_lo, f_hi, RootTol::relative(ROOT_RTOL, hi))
    }

    /// `σ*` (root of `𝒢`) and `σ_*` (root of `ℱ`).
    pub fn critical_values(&self) -> Result<CriticalValues> {
        let sigma_star = self.critical_root(|s| s.g_functional())?;
        let sigma_sub_star = self.critical_root(|s| s.fcal_functional())?;
        Ok(CriticalValues { sigma_star, sigma_sub_star })
    }

    /// The dormant solution for boundary supply `σ̄`.
    pub fn stationary_solution(&self, sigma_bar: f64) -> Result<StationaryState> {
        let cv = self.critical_values()?;
        self.supply(sigma_bar)?.stationary(&cv)
    }
}
