//! Model parameters, rate functions and assumption checks.
//!
//! The nutrient field obeys `Δσ = f(σ)` in the proliferating layer
//! (`σ > σ_Q`), `Δσ = g(σ)` in the quiescent layer (`σ_D < σ ≤ σ_Q`) and
//! `Δσ = 0` in the necrotic core. Proliferating cells grow at rate `S(σ)`,
//! quiescent and necrotic cells are removed at rates `ν1` and `ν2`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{ConfigError, Result, SolveError, Violation};

/// Absolute tolerance for the `f(0) = g(0) = 0` and `S(σ̃) = 0` checks.
const ZERO_TOL: f64 = 1e-12;
/// Sample count for the monotonicity checks on user-supplied rates.
const MONOTONICITY_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Necrotic threshold.
    pub sigma_d: f64,
    /// Quiescent threshold.
    pub sigma_q: f64,
    /// Removal rate of quiescent cells.
    pub nu1: f64,
    /// Removal rate of necrotic cells.
    pub nu2: f64,
}

/// `f(σ) = λ1 σ`, `g(σ) = λ2 σ`, `S(σ) = μ (σ − σ̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: f64,
    pub sigma_tilde: f64,
}

/// Extension point for general C¹ rate functions.
///
/// Derivatives are supplied explicitly rather than differenced. Global
/// Lipschitz continuity of `f` and `g` is assumed and not checked.
pub trait RateFunctions: Send + Sync {
    fn f(&self, sigma: f64) -> f64;
    fn g(&self, sigma: f64) -> f64;
    fn s(&self, sigma: f64) -> f64;
    fn df(&self, sigma: f64) -> f64;
    fn dg(&self, sigma: f64) -> f64;
    fn ds(&self, sigma: f64) -> f64;
    /// The zero of `S`.
    fn sigma_tilde(&self) -> f64;
}

/// The rate triple `(f, g, S)`.
#[derive(Clone)]
pub enum Rates {
    Linear(LinearRates),
    Custom(Arc<dyn RateFunctions>),
}

impl fmt::Debug for Rates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rates::Linear(l) => f.debug_tuple("Linear").field(l).finish(),
            Rates::Custom(c) => f
                .debug_struct("Custom")
                .field("sigma_tilde", &c.sigma_tilde())
                .finish_non_exhaustive(),
        }
    }
}

/// Selects one of the rate functions or their derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFn {
    F,
    G,
    S,
    DF,
    DG,
    DS,
}

impl Rates {
    #[inline]
    pub fn f(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.lambda1 * sigma,
            Rates::Custom(c) => c.f(sigma),
        }
    }

    #[inline]
    pub fn g(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.lambda2 * sigma,
            Rates::Custom(c) => c.g(sigma),
        }
    }

    #[inline]
    pub fn s(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.mu * (sigma - l.sigma_tilde),
            Rates::Custom(c) => c.s(sigma),
        }
    }

    #[inline]
    pub fn df(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.lambda1,
            Rates::Custom(c) => c.df(sigma),
        }
    }

    #[inline]
    pub fn dg(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.lambda2,
            Rates::Custom(c) => c.dg(sigma),
        }
    }

    #[inline]
    pub fn ds(&self, sigma: f64) -> f64 {
        match self {
            Rates::Linear(l) => l.mu,
            Rates::Custom(c) => c.ds(sigma),
        }
    }

    pub fn sigma_tilde(&self) -> f64 {
        match self {
            Rates::Linear(l) => l.sigma_tilde,
            Rates::Custom(c) => c.sigma_tilde(),
        }
    }

    /// Evaluates the selected function; concentrations must be nonnegative.
    pub fn eval(&self, which: RateFn, sigma: f64) -> Result<f64> {
        if sigma < 0.0 || sigma.is_nan() {
            return Err(SolveError::NegativeConcentration { sigma });
        }
        Ok(match which {
            RateFn::F => self.f(sigma),
            RateFn::G => self.g(sigma),
            RateFn::S => self.s(sigma),
            RateFn::DF => self.df(sigma),
            RateFn::DG => self.dg(sigma),
            RateFn::DS => self.ds(sigma),
        })
    }
}

/// Raw, unchecked model configuration.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub thresholds: Thresholds,
    pub rates: Rates,
    /// External nutrient concentration.
    pub sigma_bar: f64,
    /// Initial tumor radius.
    pub r0: f64,
}

impl ModelConfig {
    /// Reference parameter set used throughout the tests and examples.
    pub fn canonical() -> Self {
        ModelConfig {
            thresholds: Thresholds { sigma_d: 0.2, sigma_q: 0.5, nu1: 0.6, nu2: 1.0 },
            rates: Rates::Linear(LinearRates {
                lambda1: 1.0,
                lambda2: 0.5,
                mu: 1.0,
                sigma_tilde: 1.0,
            }),
            sigma_bar: 2.0,
            r0: 1.0,
        }
    }

    pub fn validate(self) -> core::result::Result<ValidatedConfig, ConfigError> {
        validate_config(self)
    }
}

/// A configuration that satisfied every assumption check. Immutable.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    inner: ModelConfig,
}

impl ValidatedConfig {
    pub fn config(&self) -> &ModelConfig {
        &self.inner
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.inner.thresholds
    }

    pub fn rates(&self) -> &Rates {
        &self.inner.rates
    }

    pub fn sigma_bar(&self) -> f64 {
        self.inner.sigma_bar
    }

    pub fn r0(&self) -> f64 {
        self.inner.r0
    }

    pub fn into_inner(self) -> ModelConfig {
        self.inner
    }
}

/// Checks the model assumptions and returns every violated clause.
///
/// For custom rates, positivity of the derivatives is sampled on
/// `MONOTONICITY_SAMPLES` points of `[0, 4 σ̄]`; this cannot prove
/// monotonicity between samples.
pub fn validate_config(cfg: ModelConfig) -> core::result::Result<ValidatedConfig, ConfigError> {
    let mut violations = Vec::new();
    let th = cfg.thresholds;

    let mut finite = |field: &'static str, v: f64| {
        if !v.is_finite() {
            violations.push(Violation::NonFinite { field });
            false
        } else {
            true
        }
    };
    let mut all_finite = finite("sigma_D", th.sigma_d)
        & finite("sigma_Q", th.sigma_q)
        & finite("nu1", th.nu1)
        & finite("nu2", th.nu2)
        & finite("sigma_bar", cfg.sigma_bar)
        & finite("R0", cfg.r0);
    match &cfg.rates {
        Rates::Linear(l) => {
            all_finite &= finite("lambda1", l.lambda1)
                & finite("lambda2", l.lambda2)
                & finite("mu", l.mu)
                & finite("sigma_tilde", l.sigma_tilde);
        }
        Rates::Custom(c) => {
            all_finite &= finite("sigma_tilde", c.sigma_tilde());
        }
    }
    if !all_finite {
        return Err(ConfigError { violations });
    }

    let mut fail = |name: &'static str, detail: alloc::string::String| {
        violations.push(Violation::AssumptionViolated { name, detail });
    };

    if th.sigma_d <= 0.0 {
        fail("(A3): sigma_D > 0", format!("sigma_D = {}", th.sigma_d));
    }
    if th.sigma_d >= th.sigma_q {
        fail(
            "(A3): sigma_D < sigma_Q",
            format!("sigma_D = {} is not below sigma_Q = {}", th.sigma_d, th.sigma_q),
        );
    }
    if th.nu1 <= 0.0 {
        fail("nu1 > 0", format!("nu1 = {}", th.nu1));
    }
    if th.nu2 <= 0.0 {
        fail("nu2 > 0", format!("nu2 = {}", th.nu2));
    }
    if th.nu1 > th.nu2 {
        fail("(A3): -nu1 ≥ -nu2", format!("nu1 = {} exceeds nu2 = {}", th.nu1, th.nu2));
    }
    if cfg.sigma_bar <= 0.0 {
        fail("sigma_bar > 0", format!("sigma_bar = {}", cfg.sigma_bar));
    }
    if cfg.r0 <= 0.0 {
        fail("R0 > 0", format!("R0 = {}", cfg.r0));
    }

    let rates = &cfg.rates;
    let sigma_tilde = rates.sigma_tilde();
    match rates {
        Rates::Linear(l) => {
            if l.lambda1 <= 0.0 {
                fail("(A1): f' > 0", format!("lambda1 = {}", l.lambda1));
            }
            if l.lambda2 <= 0.0 {
                fail("(A1): g' > 0", format!("lambda2 = {}", l.lambda2));
            }
            if l.mu <= 0.0 {
                fail("(A2): S' > 0", format!("mu = {}", l.mu));
            }
            if l.sigma_tilde <= 0.0 {
                fail("(A2): sigma_tilde > 0", format!("sigma_tilde = {}", l.sigma_tilde));
            }
        }
        Rates::Custom(c) => {
            if c.f(0.0).abs() > ZERO_TOL {
                fail("(A1): f(0) = 0", format!("f(0) = {}", c.f(0.0)));
            }
            if c.g(0.0).abs() > ZERO_TOL {
                fail("(A1): g(0) = 0", format!("g(0) = {}", c.g(0.0)));
            }
            if sigma_tilde <= 0.0 {
                fail("(A2): sigma_tilde > 0", format!("sigma_tilde = {sigma_tilde}"));
            } else if c.s(sigma_tilde).abs() > ZERO_TOL {
                fail(
                    "(A2): S(sigma_tilde) = 0",
                    format!("S({sigma_tilde}) = {}", c.s(sigma_tilde)),
                );
            }
            let span = 4.0 * cfg.sigma_bar.max(th.sigma_q).max(sigma_tilde);
            type Deriv = fn(&dyn RateFunctions, f64) -> f64;
            let checks: [(&'static str, Deriv); 3] = [
                ("(A1): f' > 0", |c, x| c.df(x)),
                ("(A1): g' > 0", |c, x| c.dg(x)),
                ("(A2): S' > 0", |c, x| c.ds(x)),
            ];
            for (name, deriv) in checks {
                let bad = (0..MONOTONICITY_SAMPLES)
                    .map(|i| span * i as f64 / (MONOTONICITY_SAMPLES - 1) as f64)
                    .find(|&x| {
                        let d = deriv(c.as_ref(), x);
                        !(d > 0.0)
                    });
                if let Some(x) = bad {
                    fail(name, format!("derivative {} at sigma = {x}", deriv(c.as_ref(), x)));
                }
            }
        }
    }

    if sigma_tilde.is_finite() && th.sigma_q >= sigma_tilde {
        fail(
            "(A3): sigma_Q < sigma_tilde",
            format!("sigma_Q = {} is not below sigma_tilde = {sigma_tilde}", th.sigma_q),
        );
    }
    if th.sigma_q >= 0.0 {
        let (fq, gq) = (rates.f(th.sigma_q), rates.g(th.sigma_q));
        if !(fq >= gq) {
            fail("(A3): f(sigma_Q) ≥ g(sigma_Q)", format!("f(sigma_Q) = {fq} < g(sigma_Q) = {gq}"));
        }
        let sq = rates.s(th.sigma_q);
        if !(sq >= -th.nu1) {
            fail("(A3): S(sigma_Q) ≥ -nu1", format!("S(sigma_Q) = {sq} < -nu1 = {}", -th.nu1));
        }
    }

    if violations.is_empty() {
        Ok(ValidatedConfig { inner: cfg })
    } else {
        Err(ConfigError { violations })
    }
}
