//! Run configuration: `[params]`, `[space]` and `[experiment]` sections of a
//! TOML file.

use std::path::Path;

use iontrap_core::{BalancedParams, ModelParams, SpaceConfig};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

/// Experiments understood by the runner.
pub const EXPERIMENTS: [&str; 7] = [
    "spectrum",
    "evolve",
    "compare-rwa",
    "residual-order",
    "anticrossing",
    "limits",
    "frame-chain",
];

/// Raw `[params]` table; exactly one of the two parameter sets must be filled.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub nu: Option<f64>,
    pub omega_ge: Option<f64>,
    #[serde(rename = "omega_L")]
    pub omega_l: Option<f64>,
    #[serde(rename = "Omega_R")]
    pub omega_r: Option<f64>,
    pub eta: Option<f64>,
    pub delta_breve: Option<f64>,
    pub eta_breve: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawSpace {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_margin")]
    pub interior_margin: usize,
}

fn default_n_max() -> usize {
    SpaceConfig::DEFAULT.n_max()
}

fn default_margin() -> usize {
    SpaceConfig::DEFAULT.interior_margin()
}

impl Default for RawSpace {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            interior_margin: default_margin(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct RawExperiment {
    pub name: String,
    #[serde(flatten)]
    pub options: toml::Table,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<RawParams>,
    #[serde(default)]
    space: RawSpace,
    experiment: Option<RawExperiment>,
}

/// Either the laboratory parameters or the reduced balanced set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Params {
    Full(ModelParams),
    Reduced(BalancedParams),
}

impl Params {
    pub fn balanced(&self) -> Result<BalancedParams, RunError> {
        match self {
            Params::Full(p) => p.balanced().map_err(RunError::from_params),
            Params::Reduced(b) => Ok(*b),
        }
    }

    pub fn full(&self, experiment: &str) -> Result<ModelParams, RunError> {
        match self {
            Params::Full(p) => Ok(*p),
            Params::Reduced(_) => Err(RunError::Config(format!(
                "experiment `{experiment}` needs the laboratory parameters (omega_ge, omega_L, Omega_R, eta)"
            ))),
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            Params::Full(p) => p.nu,
            Params::Reduced(b) => b.nu,
        }
    }
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: Params,
    pub space: SpaceConfig,
    pub experiment: String,
    pub options: toml::Table,
    /// The parsed document, echoed into the metadata.
    pub echo: toml::Table,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, RunError> {
        let echo: toml::Table = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        let raw: RawConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        let params = raw
            .params
            .ok_or_else(|| RunError::Config("missing [params] section".into()))?;
        let experiment = raw
            .experiment
            .ok_or_else(|| RunError::Config("missing [experiment] section".into()))?;
        if !EXPERIMENTS.contains(&experiment.name.as_str()) {
            return Err(RunError::Config(format!(
                "unknown experiment `{}`; valid experiments: {}",
                experiment.name,
                EXPERIMENTS.join(", ")
            )));
        }
        let space = SpaceConfig::new(raw.space.n_max, raw.space.interior_margin)
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(Self {
            params: resolve_params(&params)?,
            space,
            experiment: experiment.name,
            options: experiment.options,
            echo,
        })
    }

    /// Experiment options decoded into `T`; unknown keys are rejected.
    pub fn options<T: for<'de> Deserialize<'de>>(&self) -> Result<T, RunError> {
        toml::Value::Table(self.options.clone())
            .try_into()
            .map_err(|e: toml::de::Error| {
                RunError::Config(format!("[experiment] options for `{}`: {}", self.experiment, e.message()))
            })
    }
}

fn resolve_params(raw: &RawParams) -> Result<Params, RunError> {
    let nu = raw
        .nu
        .ok_or_else(|| RunError::Config("[params] needs nu".into()))?;
    let full = [raw.omega_ge, raw.omega_l, raw.omega_r, raw.eta];
    let reduced = [raw.delta_breve, raw.eta_breve, raw.lambda];
    let any_full = full.iter().any(Option::is_some);
    let any_reduced = reduced.iter().any(Option::is_some);
    match (any_full, any_reduced) {
        (true, true) => Err(RunError::Config(
            "[params] mixes the laboratory set and the reduced set; give exactly one".into(),
        )),
        (false, false) => Err(RunError::Config(
            "[params] needs either (omega_ge, omega_L, Omega_R, eta) or (delta_breve, eta_breve, lambda)".into(),
        )),
        (true, false) => {
            let [Some(omega_ge), Some(omega_l), Some(omega_r), Some(eta)] = full else {
                return Err(RunError::Config(
                    "[params] laboratory set incomplete: need omega_ge, omega_L, Omega_R, eta".into(),
                ));
            };
            ModelParams::new(nu, omega_ge, omega_l, omega_r, eta)
                .map(Params::Full)
                .map_err(|e| RunError::Config(e.to_string()))
        }
        (false, true) => {
            let [Some(delta_breve), Some(eta_breve), Some(lambda)] = reduced else {
                return Err(RunError::Config(
                    "[params] reduced set incomplete: need delta_breve, eta_breve, lambda".into(),
                ));
            };
            BalancedParams::new(nu, delta_breve, eta_breve, lambda)
                .map(Params::Reduced)
                .map_err(|e| RunError::Config(e.to_string()))
        }
    }
}
