//! JSON run configuration. Unknown keys are a hard error, which guards
//! against silent typos in parameter files.

use crate::integrator::IntegratorConfig;
use crate::model::{coulomb_law, stribeck_law, FrictionLaw, Params, StribeckConstants};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Friction-law selector with constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FrictionSpec {
    Coulomb,
    Stribeck { alpha: f64, beta: f64, gamma: f64 },
}

impl FrictionSpec {
    pub fn stribeck_constants(&self) -> Result<Option<StribeckConstants>> {
        match self {
            FrictionSpec::Coulomb => Ok(None),
            FrictionSpec::Stribeck { alpha, beta, gamma } => {
                Ok(Some(StribeckConstants::new(*alpha, *beta, *gamma)?))
            }
        }
    }

    /// Construct the law behind the shared contract.
    pub fn build(&self) -> Result<Box<dyn FrictionLaw>> {
        Ok(match self.stribeck_constants()? {
            None => Box::new(coulomb_law()),
            Some(k) => Box::new(stribeck_law(k)),
        })
    }
}

/// Optional initial state for `simulate`; defaults to the grazing point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x1: f64,
    pub x2: f64,
}

/// One run configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub c: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub epsilon: f64,
    pub friction: FrictionSpec,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub initial: Option<InitialState>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validate every field before any computation starts.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.friction.stribeck_constants()?;
        if let Some(cfg) = &self.integrator {
            cfg.validate()?;
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(Error::invalid("horizon", format!("must be > 0, got {h}")));
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return Err(Error::invalid("t_end", format!("must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.c, self.v, self.epsilon)
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        self.integrator.unwrap_or_default()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(crate::detector::default_horizon)
    }
}
