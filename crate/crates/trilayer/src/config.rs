//! JSON configuration files.
//!
//! ```json
//! {
//!   "thresholds": { "sigma_D": 0.2, "sigma_Q": 0.5, "nu1": 0.6, "nu2": 1.0 },
//!   "rates": { "kind": "linear", "lambda1": 1.0, "lambda2": 0.5, "mu": 1.0, "sigma_tilde": 1.0 },
//!   "sigma_bar": 2.0,
//!   "R0": 1.0
//! }
//! ```
//!
//! Every key is required and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use trilayer_core::model::{LinearRates, ModelConfig, Rates, Thresholds};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsFile {
    #[serde(rename = "sigma_D")]
    pub sigma_d: f64,
    #[serde(rename = "sigma_Q")]
    pub sigma_q: f64,
    pub nu1: f64,
    pub nu2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RatesFile {
    Linear { lambda1: f64, lambda2: f64, mu: f64, sigma_tilde: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub thresholds: ThresholdsFile,
    pub rates: RatesFile,
    pub sigma_bar: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        // Plain data with string keys; serialization cannot fail.
        serde_json::to_string_pretty(self).unwrap()
    }

    /// The unchecked model configuration. Validation happens in the core.
    pub fn to_model(&self) -> ModelConfig {
        let th = self.thresholds;
        let RatesFile::Linear { lambda1, lambda2, mu, sigma_tilde } = self.rates;
        ModelConfig {
            thresholds: Thresholds {
                sigma_d: th.sigma_d,
                sigma_q: th.sigma_q,
                nu1: th.nu1,
                nu2: th.nu2,
            },
            rates: Rates::Linear(LinearRates { lambda1, lambda2, mu, sigma_tilde }),
            sigma_bar: self.sigma_bar,
            r0: self.r0,
        }
    }

    /// `None` for custom rate functions, which have no file form.
    pub fn from_model(cfg: &ModelConfig) -> Option<Self> {
        let Rates::Linear(l) = &cfg.rates else {
            return None;
        };
        let th = cfg.thresholds;
        Some(ConfigFile {
            thresholds: ThresholdsFile {
                sigma_d: th.sigma_d,
                sigma_q: th.sigma_q,
                nu1: th.nu1,
                nu2: th.nu2,
            },
            rates: RatesFile::Linear {
                lambda1: l.lambda1,
                lambda2: l.lambda2,
                mu: l.mu,
                sigma_tilde: l.sigma_tilde,
            },
            sigma_bar: cfg.sigma_bar,
            r0: cfg.r0,
        })
    }
}
