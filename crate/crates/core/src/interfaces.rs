//! Free-boundary shooting maps and assembled nutrient profiles.
//!
//! Profiles are built from the inside out. The quiescent core is launched
//! either from a necrotic radius `ρ` (value `σ_D`, zero slope) or from a
//! center value in `[σ_D, σ_Q]`, integrated under `g` until `σ_Q` (giving
//! the interface `η` and its flux), and continued under `f` until the
//! boundary value `σ̄` (giving the tumor radius `R`). Each structural
//! branch is therefore a one-parameter family, and every inverse map is a
//! single bracketed root find over that parameter.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Result, SolveError};
use crate::model::{Rates, Thresholds, ValidatedConfig};
use crate::ode::Tolerance;
use crate::radial::{integrate_radial, RadialSolution, RadialStart, StopCondition, RADIAL_TOL};
use crate::roots::{brent, RootTol};

/// Relative tolerance of every inverse map.
pub const ROOT_RTOL: f64 = 1e-12;
/// Relative mismatch of `σ(R)` against `σ̄` that triggers a refinement.
const POLISH_RTOL: f64 = 1e-13;

/// A validated configuration together with the critical quiescent core,
/// which depends only on `g`, `σ_D` and `σ_Q`.
#[derive(Debug, Clone)]
pub struct Model {
    cfg: ValidatedConfig,
    tol: Tolerance,
    core: RadialSolution,
}

/// Nutrient regime set by the boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `σ̄ ≤ σ_D`
    Necrotic,
    /// `σ_D < σ̄ ≤ σ_Q`
    Quiescent,
    /// `σ̄ > σ_Q`
    Proliferating,
}

impl Regime {
    pub fn of(sigma_bar: f64, th: &Thresholds) -> Self {
        if sigma_bar <= th.sigma_d {
            Regime::Necrotic
        } else if sigma_bar <= th.sigma_q {
            Regime::Quiescent
        } else {
            Regime::Proliferating
        }
    }
}

/// Critical radii for one boundary value. Absent entries are undefined in
/// the regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRadii {
    pub sigma_bar: f64,
    pub eta_star: f64,
    /// `R_*`: one-layer / two-layer boundary (`σ̄ > σ_Q`).
    pub r_sub_star: Option<f64>,
    /// `R*`: two-layer / three-layer boundary (`σ̄ > σ_Q`).
    pub r_star: Option<f64>,
    /// Quiescent / quiescent-necrotic boundary (`σ_D < σ̄ ≤ σ_Q`).
    pub r_q_star: Option<f64>,
}

/// Free boundaries of the profile of radius `R` and the flux that launches
/// the proliferating arc. Absent entries have no layer behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceGeometry {
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub radius: f64,
    pub phi_at_eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerTag {
    Necrotic,
    Quiescent,
    Proliferating,
}

impl LayerTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerTag::Necrotic => "necrotic",
            LayerTag::Quiescent => "quiescent",
            LayerTag::Proliferating => "proliferating",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerData {
    Constant(f64),
    Arc(RadialSolution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub tag: LayerTag,
    pub start: f64,
    pub end: f64,
    pub data: LayerData,
}

impl Layer {
    pub fn value_at(&self, r: f64) -> Result<f64> {
        match &self.data {
            LayerData::Constant(v) => Ok(*v),
            LayerData::Arc(a) => a.value_at(r),
        }
    }

    pub fn flux_at(&self, r: f64) -> Result<f64> {
        match &self.data {
            LayerData::Constant(_) => Ok(0.0),
            LayerData::Arc(a) => a.flux_at(r),
        }
    }
}

/// One point of a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    pub sigma: f64,
    pub dsigma: f64,
    pub layer: LayerTag,
}

/// The nutrient concentration on `[0, R]`, layer by layer from the center.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    layers: Vec<Layer>,
    rho: Option<f64>,
    eta: Option<f64>,
    radius: f64,
    sigma_bar: f64,
    growth_numerator: f64,
}

impl RadialProfile {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Necrotic radius, when a necrotic core borders a quiescent layer.
    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    /// Quiescent / proliferating interface, when both layers exist.
    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sigma_bar(&self) -> f64 {
        self.sigma_bar
    }

    /// `ρ / R`
    pub fn psi(&self) -> Option<f64> {
        self.rho.map(|r| r / self.radius)
    }

    /// `η / R`
    pub fn phi_frac(&self) -> Option<f64> {
        self.eta.map(|e| e / self.radius)
    }

    /// `∫₀^R (S·1{σ>σ_Q} − ν1·1{σ_D<σ≤σ_Q} − ν2·1{σ≤σ_D}) r² dr`.
    pub fn growth_numerator(&self) -> f64 {
        self.growth_numerator
    }

    /// Tags are ordered from the center outward.
    pub fn tags(&self) -> Vec<LayerTag> {
        self.layers.iter().map(|l| l.tag).collect()
    }

    /// The layer holding `r`; interface points belong to the inner layer.
    pub fn layer_at(&self, r: f64) -> Result<&Layer> {
        let slop = 1e-12 * self.radius;
        if !(r >= -slop && r <= self.radius + slop) {
            return Err(SolveError::OutOfRange { r, lo: 0.0, hi: self.radius });
        }
        Ok(self.layers.iter().find(|l| r <= l.end).unwrap_or_else(|| self.layers.last().unwrap()))
    }

    pub fn sigma_at(&self, r: f64) -> Result<f64> {
        self.layer_at(r)?.value_at(r)
    }

    pub fn dsigma_at(&self, r: f64) -> Result<f64> {
        self.layer_at(r)?.flux_at(r)
    }

    pub fn center_value(&self) -> f64 {
        match &self.layers[0].data {
            LayerData::Constant(v) => *v,
            LayerData::Arc(a) => a.u()[0],
        }
    }

    /// Grid points of every layer, center outward. A point shared by two
    /// layers is reported once, with the inner layer's tag.
    pub fn samples(&self) -> Vec<ProfileSample> {
        let mut out: Vec<ProfileSample> = Vec::new();
        for layer in &self.layers {
            let pts: Vec<(f64, f64, f64)> = match &layer.data {
                LayerData::Constant(v) => vec![(layer.start, *v, 0.0), (layer.end, *v, 0.0)],
                LayerData::Arc(a) => a
                    .r_grid()
                    .iter()
                    .zip(a.u())
                    .zip(a.du())
                    .map(|((&r, &u), &du)| (r, u, du))
                    .collect(),
            };
            for (r, sigma, dsigma) in pts {
                if out.last().is_some_and(|p| p.r >= r) {
                    continue;
                }
                out.push(ProfileSample { r, sigma, dsigma, layer: layer.tag });
            }
        }
        out
    }
}

/// A branch of the profile family and its shooting parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    Necrotic,
    Quiescent { center: f64 },
    QuiescentNecrotic { rho: f64 },
    Proliferating { center: f64 },
    ProliferatingQuiescent { center: f64 },
    ThreeLayer { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ShotEnd {
    AtValue,
    AtRadius(f64),
}

/// A shot profile before it is tied to a requested radius.
#[derive(Debug, Clone)]
pub(crate) struct Shot {
    pub layers: Vec<Layer>,
    pub eta: Option<f64>,
    pub end: f64,
    pub numerator: f64,
}

/// Quiescent core up to the interface `η`.
#[derive(Debug, Clone)]
pub(crate) struct Core {
    pub eta: f64,
    pub flux: f64,
    pub arc: Option<RadialSolution>,
}

/// Root of a branch residual whose endpoint signs are known exactly.
/// Endpoints produced by different arcs may land on the wrong side by
/// rounding; the nearer endpoint is then the root.
fn branch_root<F>(f: F, a: f64, b: f64, fa: f64, fb: f64, tol: RootTol, scale: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let same = (fa > 0.0 && fb > 0.0) || (fa < 0.0 && fb < 0.0);
    if same && fa.abs().min(fb.abs()) <= 1e-9 * scale {
        return Ok(if fa.abs() <= fb.abs() { a } else { b });
    }
    brent(f, a, b, fa, fb, tol)
}

impl Model {
    pub fn new(cfg: ValidatedConfig) -> Result<Self> {
        Self::with_tolerance(cfg, RADIAL_TOL)
    }

    /// Uses `tol` for every radial arc.
    pub fn with_tolerance(cfg: ValidatedConfig, tol: Tolerance) -> Result<Self> {
        let th = *cfg.thresholds();
        let rates = cfg.rates();
        let core = integrate_radial(
            |u| rates.g(u),
            |u| rates.s(u),
            RadialStart::center(th.sigma_d),
            StopCondition::until_value(th.sigma_q),
            tol,
        )?;
        Ok(Model { cfg, tol, core })
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.cfg
    }

    pub fn thresholds(&self) -> &Thresholds {
        self.cfg.thresholds()
    }

    pub fn rates(&self) -> &Rates {
        self.cfg.rates()
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// The critical core: center value `σ_D`, reaching `σ_Q` at `η*`.
    pub fn critical_core(&self) -> &RadialSolution {
        &self.core
    }

    pub(crate) fn quiescent_arc(
        &self,
        start: RadialStart,
        stop: StopCondition,
    ) -> Result<RadialSolution> {
        let rates = self.rates();
        integrate_radial(|u| rates.g(u), |u| rates.s(u), start, stop, self.tol)
    }

    pub(crate) fn proliferating_arc(
        &self,
        start: RadialStart,
        stop: StopCondition,
    ) -> Result<RadialSolution> {
        let rates = self.rates();
        integrate_radial(|u| rates.f(u), |u| rates.s(u), start, stop, self.tol)
    }

    /// Critical radius of the quiescent core (center value exactly `σ_D`).
    pub fn eta_star(&self) -> f64 {
        self.core.end()
    }

    pub(crate) fn core_from_rho(&self, rho: f64) -> Result<Core> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(SolveError::InvalidStart { detail: "necrotic radius must be >= 0" });
        }
        let arc = if rho == 0.0 {
            self.core.clone()
        } else {
            let th = self.thresholds();
            self.quiescent_arc(
                RadialStart { r0: rho, u0: th.sigma_d, du0: 0.0 },
                StopCondition::until_value(th.sigma_q),
            )?
        };
        Ok(Core { eta: arc.end(), flux: arc.end_flux(), arc: Some(arc) })
    }

    pub(crate) fn core_from_center(&self, center: f64) -> Result<Core> {
        let th = self.thresholds();
        if center >= th.sigma_q {
            return Ok(Core { eta: 0.0, flux: 0.0, arc: None });
        }
        let arc = if center == th.sigma_d {
            self.core.clone()
        } else {
            self.quiescent_arc(RadialStart::center(center), StopCondition::until_value(th.sigma_q))?
        };
        Ok(Core { eta: arc.end(), flux: arc.end_flux(), arc: Some(arc) })
    }

    /// Proliferating arc launched from the interface `(η, σ_Q, flux)`.
    pub(crate) fn outer_arc(
        &self,
        eta: f64,
        flux: f64,
        stop: StopCondition,
    ) -> Result<RadialSolution> {
        let sigma_q = self.thresholds().sigma_q;
        let start = if eta == 0.0 {
            RadialStart::center(sigma_q)
        } else {
            RadialStart { r0: eta, u0: sigma_q, du0: flux }
        };
        self.proliferating_arc(start, stop)
    }

    /// `η(ρ)`: where the quiescent arc launched at the necrotic radius
    /// `ρ` reaches `σ_Q`.
    pub fn eta_of_rho(&self, rho: f64) -> Result<f64> {
        Ok(self.core_from_rho(rho)?.eta)
    }

    /// Inverse of [`Model::eta_of_rho`] on `[η*, ∞)`.
    pub fn rho_of_eta(&self, eta: f64) -> Result<f64> {
        let es = self.eta_star();
        if !(eta >= es * (1.0 - ROOT_RTOL)) || !eta.is_finite() {
            return Err(SolveError::BelowEtaStar { eta, eta_star: es });
        }
        if eta <= es {
            return Ok(0.0);
        }
        let hi_val = self.eta_of_rho(eta)? - eta;
        brent(
            |rho| Ok(self.eta_of_rho(rho)? - eta),
            0.0,
            eta,
            es - eta,
            hi_val,
            RootTol::relative(ROOT_RTOL, eta),
        )
    }

    /// Center value of the quiescent core whose interface sits at
    /// `eta ∈ (0, η*]`.
    pub(crate) fn center_of_core(&self, eta: f64) -> Result<f64> {
        let th = *self.thresholds();
        let es = self.eta_star();
        brent(
            |c| Ok(self.core_from_center(c)?.eta - eta),
            th.sigma_d,
            th.sigma_q,
            es - eta,
            -eta,
            RootTol::relative(ROOT_RTOL, th.sigma_q),
        )
    }

    /// `Φ̃(η)`: interface flux of the core without necrosis, `0 < η ≤ η*`.
    pub fn two_layer_flux(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return Err(SolveError::NonPositiveEta { eta });
        }
        let es = self.eta_star();
        if eta > es * (1.0 + ROOT_RTOL) {
            return Err(SolveError::OutOfRange { r: eta, lo: 0.0, hi: es });
        }
        let c = self.center_of_core(eta.min(es))?;
        Ok(self.core_from_center(c)?.flux)
    }

    /// `Φ(η)`: interface flux of the core around a necrotic center, `η ≥ η*`.
    pub fn three_layer_flux(&self, eta: f64) -> Result<f64> {
        let rho = self.rho_of_eta(eta)?;
        Ok(self.core_from_rho(rho)?.flux)
    }

    /// Flux at the quiescent interface: `Φ̃` below `η*`, `Φ` from `η*` on.
    pub fn interface_flux(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return Err(SolveError::NonPositiveEta { eta });
        }
        if eta >= self.eta_star() {
            self.three_layer_flux(eta)
        } else {
            self.two_layer_flux(eta)
        }
    }

    fn require_proliferating(&self, sigma_bar: f64) -> Result<()> {
        let sigma_q = self.thresholds().sigma_q;
        if !(sigma_bar > sigma_q) || !sigma_bar.is_finite() {
            return Err(SolveError::SigmaBelowQuiescent { sigma_bar, sigma_q });
        }
        Ok(())
    }

    /// `R(η, σ̄)`: where the proliferating arc from the interface `η`
    /// reaches `σ̄`.
    pub fn r_of_eta(&self, eta: f64, sigma_bar: f64) -> Result<f64> {
        self.require_proliferating(sigma_bar)?;
        if !(eta >= 0.0) {
            return Err(SolveError::NonPositiveEta { eta });
        }
        let flux = if eta == 0.0 { 0.0 } else { self.interface_flux(eta)? };
        Ok(self.outer_arc(eta, flux, StopCondition::until_value(sigma_bar))?.end())
    }

    /// `R*(σ̄)`: the radius whose profile has center value exactly `σ_D`.
    pub fn r_star(&self, sigma_bar: f64) -> Result<f64> {
        self.require_proliferating(sigma_bar)?;
        let arc = self.outer_arc(
            self.eta_star(),
            self.core.end_flux(),
            StopCondition::until_value(sigma_bar),
        )?;
        Ok(arc.end())
    }

    /// `R_*(σ̄)`: the radius whose profile has center value exactly `σ_Q`.
    pub fn r_sub_star(&self, sigma_bar: f64) -> Result<f64> {
        self.require_proliferating(sigma_bar)?;
        Ok(self.outer_arc(0.0, 0.0, StopCondition::until_value(sigma_bar))?.end())
    }

    /// Quiescent / quiescent-necrotic critical radius for `σ_D < σ̄ ≤ σ_Q`.
    pub fn r_q_star(&self, sigma_bar: f64) -> Result<f64> {
        let th = self.thresholds();
        if !(sigma_bar > th.sigma_d && sigma_bar <= th.sigma_q) {
            return Err(SolveError::SigmaOutOfRange { sigma_bar, lo: th.sigma_d, hi: th.sigma_q });
        }
        if sigma_bar == th.sigma_q {
            return Ok(self.eta_star());
        }
        let arc = self.quiescent_arc(
            RadialStart::center(th.sigma_d),
            StopCondition::until_value(sigma_bar),
        )?;
        Ok(arc.end())
    }

    /// `η(R, σ̄)` for `R ≥ R_*(σ̄)`; zero on the one-layer boundary.
    pub fn eta_of_r(&self, radius: f64, sigma_bar: f64) -> Result<f64> {
        self.require_proliferating(sigma_bar)?;
        self.supply(sigma_bar)?.eta_of_r(radius)
    }

    /// All radii that do not depend on a tumor radius, for one `σ̄`.
    pub fn supply(&self, sigma_bar: f64) -> Result<Supply<'_>> {
        Supply::new(self, sigma_bar)
    }

    pub fn critical_radii(&self, sigma_bar: f64) -> Result<CriticalRadii> {
        Ok(self.supply(sigma_bar)?.radii)
    }

    /// The full profile `σ(r)` on `[0, R]` with boundary value `σ̄`.
    pub fn assemble_profile(&self, radius: f64, sigma_bar: f64) -> Result<RadialProfile> {
        self.supply(sigma_bar)?.profile(radius)
    }
}

/// A model evaluated at one boundary value, holding the critical radii.
///
/// This is the memo for `(η*, R*(σ̄), R_*(σ̄))`: build it once and reuse it
/// for every radius at that `σ̄`. Results match the uncached `Model`
/// methods exactly, since both run the same arcs.
#[derive(Debug, Clone)]
pub struct Supply<'m> {
    model: &'m Model,
    sigma_bar: f64,
    regime: Regime,
    radii: CriticalRadii,
    star_growth: f64,
    sub_star_growth: f64,
}

impl<'m> Supply<'m> {
    pub fn new(model: &'m Model, sigma_bar: f64) -> Result<Self> {
        if !(sigma_bar > 0.0) || !sigma_bar.is_finite() {
            return Err(SolveError::NonPositiveInputs);
        }
        let th = *model.thresholds();
        let regime = Regime::of(sigma_bar, &th);
        let mut radii = CriticalRadii {
            sigma_bar,
            eta_star: model.eta_star(),
            r_sub_star: None,
            r_star: None,
            r_q_star: None,
        };
        let (mut star_growth, mut sub_star_growth) = (0.0, 0.0);
        match regime {
            Regime::Necrotic => {}
            Regime::Quiescent => radii.r_q_star = Some(model.r_q_star(sigma_bar)?),
            Regime::Proliferating => {
                let stop = StopCondition::until_value(sigma_bar);
                let star = model.outer_arc(model.eta_star(), model.core.end_flux(), stop)?;
                let sub = model.outer_arc(0.0, 0.0, stop)?;
                radii.r_star = Some(star.end());
                radii.r_sub_star = Some(sub.end());
                star_growth = star.growth_integral();
                sub_star_growth = sub.growth_integral();
            }
        }
        Ok(Supply { model, sigma_bar, regime, radii, star_growth, sub_star_growth })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn sigma_bar(&self) -> f64 {
        self.sigma_bar
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn radii(&self) -> &CriticalRadii {
        &self.radii
    }

    pub(crate) fn star_growth(&self) -> f64 {
        self.star_growth
    }

    pub(crate) fn sub_star_growth(&self) -> f64 {
        self.sub_star_growth
    }

    fn th(&self) -> Thresholds {
        *self.model.thresholds()
    }

    /// Builds the profile of a given branch, ending either where `σ̄` is
    /// reached or at a prescribed radius.
    pub(crate) fn shoot(&self, shape: Shape, end: ShotEnd) -> Result<Shot> {
        let m = self.model;
        let th = self.th();
        let sb = self.sigma_bar;
        let stop = match end {
            ShotEnd::AtValue => StopCondition::until_value(sb),
            ShotEnd::AtRadius(r) => StopCondition::until_radius(r),
        };
        let cube = |x: f64| x * x * x;
        let arc_layer = |tag, arc: RadialSolution| Layer {
            tag,
            start: arc.start(),
            end: arc.end(),
            data: LayerData::Arc(arc),
        };
        let necrotic_core = |rho: f64| Layer {
            tag: LayerTag::Necrotic,
            start: 0.0,
            end: rho,
            data: LayerData::Constant(th.sigma_d),
        };
        let empty = Shot { layers: Vec::new(), eta: None, end: 0.0, numerator: 0.0 };

        Ok(match shape {
            Shape::Necrotic => {
                let ShotEnd::AtRadius(r) = end else {
                    return Err(SolveError::InvalidStart {
                        detail: "necrotic profile needs a radius",
                    });
                };
                Shot {
                    layers: vec![Layer {
                        tag: LayerTag::Necrotic,
                        start: 0.0,
                        end: r,
                        data: LayerData::Constant(sb),
                    }],
                    eta: None,
                    end: r,
                    numerator: -th.nu2 * cube(r) / 3.0,
                }
            }
            Shape::Quiescent { center } => {
                if end == ShotEnd::AtValue && center >= sb {
                    return Ok(empty);
                }
                let arc = m.quiescent_arc(RadialStart::center(center), stop)?;
                let r = arc.end();
                Shot {
                    layers: vec![arc_layer(LayerTag::Quiescent, arc)],
                    eta: None,
                    end: r,
                    numerator: -th.nu1 * cube(r) / 3.0,
                }
            }
            Shape::QuiescentNecrotic { rho } => {
                let start = if rho == 0.0 {
                    RadialStart::center(th.sigma_d)
                } else {
                    RadialStart { r0: rho, u0: th.sigma_d, du0: 0.0 }
                };
                let arc = m.quiescent_arc(start, stop)?;
                let r = arc.end();
                let mut layers = Vec::with_capacity(2);
                if rho > 0.0 {
                    layers.push(necrotic_core(rho));
                }
                layers.push(arc_layer(LayerTag::Quiescent, arc));
                Shot {
                    layers,
                    eta: None,
                    end: r,
                    numerator: -th.nu1 * (cube(r) - cube(rho)) / 3.0 - th.nu2 * cube(rho) / 3.0,
                }
            }
            Shape::Proliferating { center } => {
                if end == ShotEnd::AtValue && center >= sb {
                    return Ok(empty);
                }
                let arc = m.proliferating_arc(RadialStart::center(center), stop)?;
                let (r, w) = (arc.end(), arc.growth_integral());
                Shot {
                    layers: vec![arc_layer(LayerTag::Proliferating, arc)],
                    eta: None,
                    end: r,
                    numerator: w,
                }
            }
            Shape::ProliferatingQuiescent { center } => {
                let core = m.core_from_center(center)?;
                let outer = m.outer_arc(core.eta, core.flux, stop)?;
                let (r, w) = (outer.end(), outer.growth_integral());
                let mut layers = Vec::with_capacity(2);
                if let Some(arc) = core.arc {
                    layers.push(arc_layer(LayerTag::Quiescent, arc));
                }
                layers.push(arc_layer(LayerTag::Proliferating, outer));
                Shot {
                    layers,
                    eta: Some(core.eta),
                    end: r,
                    numerator: w - th.nu1 * cube(core.eta) / 3.0,
                }
            }
            Shape::ThreeLayer { rho } => {
                let core = m.core_from_rho(rho)?;
                let outer = m.outer_arc(core.eta, core.flux, stop)?;
                let (r, w) = (outer.end(), outer.growth_integral());
                let mut layers = Vec::with_capacity(3);
                if rho > 0.0 {
                    layers.push(necrotic_core(rho));
                }
                if let Some(arc) = core.arc {
                    layers.push(arc_layer(LayerTag::Quiescent, arc));
                }
                layers.push(arc_layer(LayerTag::Proliferating, outer));
                Shot {
                    layers,
                    eta: Some(core.eta),
                    end: r,
                    numerator: w
                        - th.nu1 * cube(core.eta) / 3.0
                        - (th.nu2 - th.nu1) * cube(rho) / 3.0,
                }
            }
        })
    }

    /// Radius reached by the shot of `shape` (ends at `σ̄`).
    pub(crate) fn shot_radius(&self, shape: Shape) -> Result<f64> {
        let m = self.model;
        let stop = StopCondition::until_value(self.sigma_bar);
        let th = self.th();
        match shape {
            Shape::ProliferatingQuiescent { center } => {
                let core = m.core_from_center(center)?;
                Ok(m.outer_arc(core.eta, core.flux, stop)?.end())
            }
            Shape::ThreeLayer { rho } => {
                let core = m.core_from_rho(rho)?;
                Ok(m.outer_arc(core.eta, core.flux, stop)?.end())
            }
            Shape::QuiescentNecrotic { rho } => {
                let start = if rho == 0.0 {
                    RadialStart::center(th.sigma_d)
                } else {
                    RadialStart { r0: rho, u0: th.sigma_d, du0: 0.0 }
                };
                Ok(m.quiescent_arc(start, stop)?.end())
            }
            _ => Ok(self.shoot(shape, ShotEnd::AtValue)?.end),
        }
    }

    /// Finds the branch and shooting parameter whose profile has radius `R`.
    pub(crate) fn solve_shape(&self, radius: f64) -> Result<Shape> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SolveError::NonPositiveInputs);
        }
        let m = self.model;
        let th = self.th();
        let sb = self.sigma_bar;
        let value_tol = RootTol::relative(ROOT_RTOL, sb);
        let radius_tol = RootTol::relative(ROOT_RTOL, radius);
        match self.regime {
            Regime::Necrotic => Ok(Shape::Necrotic),
            Regime::Quiescent => {
                let rq = self.radii.r_q_star.unwrap();
                if radius <= rq {
                    let stop = StopCondition::until_radius(radius);
                    let resid = |c: f64| -> Result<f64> {
                        Ok(m.quiescent_arc(RadialStart::center(c), stop)?.end_value() - sb)
                    };
                    let center = branch_root(
                        resid,
                        th.sigma_d,
                        sb,
                        resid(th.sigma_d)?,
                        resid(sb)?,
                        value_tol,
                        sb,
                    )?;
                    Ok(Shape::Quiescent { center })
                } else {
                    let resid =
                        |rho: f64| Ok(self.shot_radius(Shape::QuiescentNecrotic { rho })? - radius);
                    let rho = branch_root(
                        resid,
                        0.0,
                        radius,
                        rq - radius,
                        resid(radius)?,
                        radius_tol,
                        radius,
                    )?;
                    let rho = self.polish(rho, 0.0, radius, radius, |rho| {
                        let start = RadialStart { r0: rho, u0: th.sigma_d, du0: 0.0 };
                        let start =
                            if rho == 0.0 { RadialStart::center(th.sigma_d) } else { start };
                        Ok(m.quiescent_arc(start, StopCondition::until_radius(radius))?.end_value())
                    })?;
                    Ok(Shape::QuiescentNecrotic { rho })
                }
            }
            Regime::Proliferating => {
                let (rs, r_star) = (self.radii.r_sub_star.unwrap(), self.radii.r_star.unwrap());
                if radius <= rs {
                    let stop = StopCondition::until_radius(radius);
                    let resid = |c: f64| -> Result<f64> {
                        Ok(m.proliferating_arc(RadialStart::center(c), stop)?.end_value() - sb)
                    };
                    let center = branch_root(
                        resid,
                        th.sigma_q,
                        sb,
                        resid(th.sigma_q)?,
                        resid(sb)?,
                        value_tol,
                        sb,
                    )?;
                    Ok(Shape::Proliferating { center })
                } else if radius <= r_star {
                    let resid = |c: f64| {
                        Ok(self.shot_radius(Shape::ProliferatingQuiescent { center: c })? - radius)
                    };
                    let center = branch_root(
                        resid,
                        th.sigma_d,
                        th.sigma_q,
                        r_star - radius,
                        rs - radius,
                        RootTol::relative(ROOT_RTOL, th.sigma_q),
                        radius,
                    )?;
                    let center = self.polish(center, th.sigma_d, th.sigma_q, th.sigma_q, |c| {
                        let core = m.core_from_center(c)?;
                        Ok(m.outer_arc(core.eta, core.flux, StopCondition::until_radius(radius))?
                            .end_value())
                    })?;
                    Ok(Shape::ProliferatingQuiescent { center })
                } else {
                    let resid =
                        |rho: f64| Ok(self.shot_radius(Shape::ThreeLayer { rho })? - radius);
                    let rho = branch_root(
                        resid,
                        0.0,
                        radius,
                        r_star - radius,
                        resid(radius)?,
                        radius_tol,
                        radius,
                    )?;
                    let rho = self.polish(rho, 0.0, radius, radius, |rho| {
                        let core = m.core_from_rho(rho)?;
                        Ok(m.outer_arc(core.eta, core.flux, StopCondition::until_radius(radius))?
                            .end_value())
                    })?;
                    Ok(Shape::ThreeLayer { rho })
                }
            }
        }
    }

    /// Refines a parameter found from the radius residual so that the arc
    /// stopped at the prescribed radius ends on `σ̄`. Near-root parameter
    /// errors are amplified by the steep outer arc; this removes them.
    fn polish<F>(&self, p0: f64, lo: f64, hi: f64, scale: f64, end_value: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let sb = self.sigma_bar;
        let resid = |p: f64| Ok(end_value(p)? - sb);
        let f0 = resid(p0)?;
        if f0.abs() <= POLISH_RTOL * sb {
            return Ok(p0);
        }
        let mut d = 1e-10 * scale;
        for _ in 0..24 {
            let (a, b) = ((p0 - d).max(lo), (p0 + d).min(hi));
            let (fa, fb) = (resid(a)?, resid(b)?);
            if (fa <= 0.0) != (fb <= 0.0) {
                let tol = RootTol { rel: 4.0 * f64::EPSILON, abs: 1e-300, max_iter: 100 };
                return match brent(resid, a, b, fa, fb, tol) {
                    Err(SolveError::MaxIterations) => Ok(p0),
                    other => other,
                };
            }
            if a == lo && b == hi {
                break;
            }
            d *= 8.0;
        }
        Ok(p0)
    }

    /// The full profile on `[0, R]`.
    pub fn profile(&self, radius: f64) -> Result<RadialProfile> {
        let shape = self.solve_shape(radius)?;
        let shot = self.shoot(shape, ShotEnd::AtRadius(radius))?;
        // a necrotic core of radius zero is no core at all
        let rho = match shape {
            Shape::ThreeLayer { rho } | Shape::QuiescentNecrotic { rho } if rho > 0.0 => Some(rho),
            _ => None,
        };
        let eta = match shape {
            Shape::ProliferatingQuiescent { .. } | Shape::ThreeLayer { .. } => shot.eta,
            _ => None,
        };
        Ok(RadialProfile {
            layers: shot.layers,
            rho,
            eta,
            radius,
            sigma_bar: self.sigma_bar,
            growth_numerator: shot.numerator,
        })
    }

    /// `(ρ, η)` at radius `R` without building the outer arc. Entries are
    /// absent where the corresponding layer does not exist.
    pub fn inner_boundaries(&self, radius: f64) -> Result<(Option<f64>, Option<f64>)> {
        let g = self.geometry(radius)?;
        Ok((g.rho, g.eta))
    }

    pub fn geometry(&self, radius: f64) -> Result<InterfaceGeometry> {
        let m = self.model;
        let (rho, core) = match self.solve_shape(radius)? {
            Shape::ThreeLayer { rho } => {
                (Some(rho).filter(|&r| r > 0.0), Some(m.core_from_rho(rho)?))
            }
            Shape::ProliferatingQuiescent { center } => (None, Some(m.core_from_center(center)?)),
            Shape::QuiescentNecrotic { rho } => (Some(rho).filter(|&r| r > 0.0), None),
            _ => (None, None),
        };
        let core = core.filter(|c| c.eta > 0.0);
        Ok(InterfaceGeometry {
            rho,
            eta: core.as_ref().map(|c| c.eta),
            radius,
            phi_at_eta: core.as_ref().map(|c| c.flux),
        })
    }

    /// `η(R, σ̄)` for `R ≥ R_*(σ̄)`.
    pub fn eta_of_r(&self, radius: f64) -> Result<f64> {
        let sigma_q = self.th().sigma_q;
        let Some(rs) = self.radii.r_sub_star else {
            return Err(SolveError::SigmaBelowQuiescent { sigma_bar: self.sigma_bar, sigma_q });
        };
        if !(radius >= rs * (1.0 - ROOT_RTOL)) {
            return Err(SolveError::BelowCriticalRadius { radius, critical: rs });
        }
        if radius <= rs {
            return Ok(0.0);
        }
        Ok(self.inner_boundaries(radius)?.1.unwrap_or(0.0))
    }

    /// `ρ(R, σ̄)`, zero up to `R*(σ̄)`.
    pub fn rho_of_r(&self, radius: f64) -> Result<f64> {
        Ok(self.inner_boundaries(radius)?.0.unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn canonical() -> Model {
        Model::new(ModelConfig::canonical().validate().unwrap()).unwrap()
    }

    // root of sinh(x)/x = q by bisection on the closed form
    fn sinhc_root(q: f64) -> f64 {
        let (mut lo, mut hi) = (1e-9, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if libm::sinh(mid) / mid < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn eta_star_matches_closed_form() {
        let m = canonical();
        let k = libm::sqrt(0.5);
        let expected = sinhc_root(2.5) / k;
        assert!((m.eta_star() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn eta_star_for_unit_slope() {
        let mut cfg = ModelConfig::canonical();
        cfg.thresholds.sigma_q = 0.4;
        if let crate::model::Rates::Linear(l) = &mut cfg.rates {
            l.lambda2 = 1.0;
        }
        let m = Model::new(cfg.validate().unwrap()).unwrap();
        let expected = sinhc_root(2.0);
        assert!((expected - 2.1773).abs() < 1e-4);
        assert!((m.eta_star() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn rho_round_trip() {
        let m = canonical();
        assert_eq!(m.rho_of_eta(m.eta_star()).unwrap(), 0.0);
        for rho in [0.1, 1.0, 10.0] {
            let back = m.rho_of_eta(m.eta_of_rho(rho).unwrap()).unwrap();
            assert!((back - rho).abs() < 1e-10 * rho.max(1.0), "rho={rho} back={back}");
        }
        assert!(matches!(m.rho_of_eta(0.5 * m.eta_star()), Err(SolveError::BelowEtaStar { .. })));
    }

    #[test]
    fn flux_branches_agree_at_eta_star() {
        let m = canonical();
        let es = m.eta_star();
        let a = m.two_layer_flux(es).unwrap();
        let b = m.three_layer_flux(es).unwrap();
        assert!((a - b).abs() <= 1e-10);
        assert!(matches!(m.interface_flux(0.0), Err(SolveError::NonPositiveEta { .. })));
    }

    #[test]
    fn outer_map_center_closed_form() {
        let m = canonical();
        // λ1 = 1, σ̄/σ_Q = 2
        let r = m.r_of_eta(0.0, 1.0).unwrap();
        assert!((r - sinhc_root(2.0)).abs() < 1e-9);
        assert!((m.r_sub_star(1.0).unwrap() - r).abs() < 1e-15);
    }

    #[test]
    fn critical_radius_boundaries() {
        let m = canonical();
        let s = m.supply(2.0).unwrap();
        let (rs, r_star) = (s.radii().r_sub_star.unwrap(), s.radii().r_star.unwrap());
        assert!(rs < r_star && r_star > m.eta_star());
        assert_eq!(s.eta_of_r(r_star).unwrap(), m.eta_star());
        assert_eq!(s.eta_of_r(rs).unwrap(), 0.0);
        assert!(matches!(s.eta_of_r(0.5 * rs), Err(SolveError::BelowCriticalRadius { .. })));
    }

    #[test]
    fn profile_regimes() {
        let m = canonical();
        let p = m.assemble_profile(3.0, 0.1).unwrap();
        assert_eq!(p.tags(), [LayerTag::Necrotic]);
        assert_eq!(p.sigma_at(1.7).unwrap(), 0.1);

        let rq = m.r_q_star(0.4).unwrap();
        let p = m.assemble_profile(0.5 * rq, 0.4).unwrap();
        assert_eq!(p.tags(), [LayerTag::Quiescent]);
        let p = m.assemble_profile(2.0 * rq, 0.4).unwrap();
        assert_eq!(p.tags(), [LayerTag::Necrotic, LayerTag::Quiescent]);
        assert!(p.rho().unwrap() > 0.0 && p.eta().is_none());

        let s = m.supply(2.0).unwrap();
        let (rs, r_star) = (s.radii().r_sub_star.unwrap(), s.radii().r_star.unwrap());
        assert_eq!(s.profile(0.5 * rs).unwrap().tags(), [LayerTag::Proliferating]);
        let two = s.profile(0.5 * (rs + r_star)).unwrap();
        assert_eq!(two.tags(), [LayerTag::Quiescent, LayerTag::Proliferating]);
        let at_star = s.profile(r_star).unwrap();
        assert!((at_star.center_value() - 0.2).abs() < 1e-12);
        let three = s.profile(2.0 * r_star).unwrap();
        assert_eq!(
            three.tags(),
            [LayerTag::Necrotic, LayerTag::Quiescent, LayerTag::Proliferating]
        );
        for p in [&two, &at_star, &three] {
            let end = p.sigma_at(p.radius()).unwrap();
            assert!((end - 2.0).abs() <= 1e-10 * 2.0);
        }
    }

    #[test]
    fn profile_layers_respect_thresholds() {
        let m = canonical();
        let s = m.supply(3.0).unwrap();
        let p = s.profile(3.0 * s.radii().r_star.unwrap()).unwrap();
        let slack = 1e-12;
        for smp in p.samples() {
            match smp.layer {
                LayerTag::Necrotic => assert!(smp.sigma <= 0.2 + slack),
                LayerTag::Quiescent => assert!(smp.sigma > 0.2 - slack && smp.sigma <= 0.5 + slack),
                LayerTag::Proliferating => assert!(smp.sigma > 0.5 - slack),
            }
        }
        let samples = p.samples();
        assert!(samples.windows(2).all(|w| w[0].r < w[1].r));
    }
}
