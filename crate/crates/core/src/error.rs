use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One failed clause of the model assumptions, or a non-finite input.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A named assumption clause, e.g. `"(A3): sigma_D < sigma_Q"`.
    AssumptionViolated { name: &'static str, detail: String },
    /// A parameter that is NaN or infinite.
    NonFinite { field: &'static str },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::AssumptionViolated { name, .. } => name,
            Violation::NonFinite { field } => field,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AssumptionViolated { name, detail } => {
                write!(f, "AssumptionViolated {name}: {detail}")
            }
            Violation::NonFinite { field } => write!(f, "NonFinite: {field}"),
        }
    }
}

/// Every violated clause found while validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn contains(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.name() == name)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} violation(s))", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ConfigError {}

/// Failures of the numerical routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveError {
    NegativeConcentration {
        sigma: f64,
    },
    /// The divergence cap radius was reached before the stop condition.
    CapExceeded {
        cap: f64,
        value: f64,
    },
    /// An `UntilValue` target at or below the starting value.
    NonMonotoneTarget {
        target: f64,
        start: f64,
    },
    InvalidStart {
        detail: &'static str,
    },
    OutOfRange {
        r: f64,
        lo: f64,
        hi: f64,
    },
    BelowEtaStar {
        eta: f64,
        eta_star: f64,
    },
    NonPositiveEta {
        eta: f64,
    },
    BelowCriticalRadius {
        radius: f64,
        critical: f64,
    },
    SigmaBelowQuiescent {
        sigma_bar: f64,
        sigma_q: f64,
    },
    /// `sigma_bar` outside the window where a quantity is defined.
    SigmaOutOfRange {
        sigma_bar: f64,
        lo: f64,
        hi: f64,
    },
    BracketNotFound {
        lo: f64,
        hi: f64,
    },
    NoSignChange {
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
    },
    NonPositiveInputs,
    NonFinite {
        at: f64,
    },
    StepSizeUnderflow {
        at: f64,
    },
    TooManySteps {
        at: f64,
    },
    MaxIterations,
}

impl SolveError {
    /// Stable identifier used in diagnostics and CLI error output.
    pub fn name(&self) -> &'static str {
        match self {
            SolveError::NegativeConcentration { .. } => "NegativeConcentration",
            SolveError::CapExceeded { .. } => "CapExceeded",
            SolveError::NonMonotoneTarget { .. } => "NonMonotoneTarget",
            SolveError::InvalidStart { .. } => "InvalidStart",
            SolveError::OutOfRange { .. } => "OutOfRange",
            SolveError::BelowEtaStar { .. } => "BelowEtaStar",
            SolveError::NonPositiveEta { .. } => "NonPositiveEta",
            SolveError::BelowCriticalRadius { .. } => "BelowCriticalRadius",
            SolveError::SigmaBelowQuiescent { .. } => "SigmaBelowQuiescent",
            SolveError::SigmaOutOfRange { .. } => "SigmaOutOfRange",
            SolveError::BracketNotFound { .. } => "BracketNotFound",
            SolveError::NoSignChange { .. } => "NoSignChange",
            SolveError::NonPositiveInputs => "NonPositiveInputs",
            SolveError::NonFinite { .. } => "NonFinite",
            SolveError::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            SolveError::TooManySteps { .. } => "TooManySteps",
            SolveError::MaxIterations => "MaxIterations",
        }
    }
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SolveError::NegativeConcentration { sigma } => {
                write!(f, "negative concentration {sigma}")
            }
            SolveError::CapExceeded { cap, value } => {
                write!(f, "cap radius {cap} reached at value {value} before the stop condition")
            }
            SolveError::NonMonotoneTarget { target, start } => {
                write!(f, "target {target} is not above the start value {start}")
            }
            SolveError::InvalidStart { detail } => write!(f, "invalid start: {detail}"),
            SolveError::OutOfRange { r, lo, hi } => {
                write!(f, "radius {r} outside the arc range [{lo}, {hi}]")
            }
            SolveError::BelowEtaStar { eta, eta_star } => {
                write!(f, "eta {eta} below the critical core radius {eta_star}")
            }
            SolveError::NonPositiveEta { eta } => write!(f, "eta {eta} is not positive"),
            SolveError::BelowCriticalRadius { radius, critical } => {
                write!(f, "radius {radius} below the critical radius {critical}")
            }
            SolveError::SigmaBelowQuiescent { sigma_bar, sigma_q } => {
                write!(f, "sigma_bar {sigma_bar} must exceed sigma_Q = {sigma_q}")
            }
            SolveError::SigmaOutOfRange { sigma_bar, lo, hi } => {
                write!(f, "sigma_bar {sigma_bar} outside ({lo}, {hi}]")
            }
            SolveError::BracketNotFound { lo, hi } => {
                write!(f, "no sign change found in [{lo}, {hi}]")
            }
            SolveError::NoSignChange { a, fa, b, fb } => {
                write!(f, "f({a}) = {fa} and f({b}) = {fb} do not bracket a root")
            }
            SolveError::NonPositiveInputs => write!(f, "inputs must be positive"),
            SolveError::NonFinite { at } => write!(f, "non-finite value encountered at {at:e}"),
            SolveError::StepSizeUnderflow { at } => write!(f, "step size underflow at {at:e}"),
            SolveError::TooManySteps { at } => write!(f, "step budget exhausted at {at:e}"),
            SolveError::MaxIterations => write!(f, "root finder did not converge"),
        }
    }
}

impl core::error::Error for SolveError {}

pub type Result<T, E = SolveError> = core::result::Result<T, E>;
