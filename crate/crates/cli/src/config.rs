// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON configuration schemas. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use lpvar::changepoint::ChangeModel;
use lpvar::filters::DEFAULT_TRUNCATION_TOL;
use lpvar::limits::{DEFAULT_GRID, DEFAULT_LEVELS};
use lpvar::{FilterSpec, Innovation, InnovationSpec, StepFunction, WeightFunction};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn one() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    DEFAULT_TRUNCATION_TOL
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterConfig {
    Identity,
    Geometric {
        ratio: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "default_tol")]
        truncation_tol: f64,
    },
    Finite {
        coeffs: Vec<f64>,
    },
}

impl FilterConfig {
    pub fn to_spec(&self) -> FilterSpec {
        match self {
            FilterConfig::Identity => FilterSpec::identity(),
            FilterConfig::Geometric {
                ratio,
                scale,
                truncation_tol,
            } => FilterSpec::geometric(*ratio, *scale).with_tolerance(*truncation_tol),
            FilterConfig::Finite { coeffs } => FilterSpec::finite(coeffs.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationConfig {
    Normal {
        #[serde(default = "one")]
        sigma_eta: f64,
    },
    Uniform {
        #[serde(default = "one")]
        sigma_eta: f64,
    },
    Rademacher {
        #[serde(default = "one")]
        sigma_eta: f64,
    },
    StudentT {
        df: f64,
        #[serde(default = "one")]
        sigma_eta: f64,
    },
}

impl Default for InnovationConfig {
    fn default() -> Self {
        InnovationConfig::Normal { sigma_eta: 1.0 }
    }
}

impl InnovationConfig {
    pub fn to_spec(&self) -> CliResult<InnovationSpec> {
        let (law, sigma) = match *self {
            InnovationConfig::Normal { sigma_eta } => (Innovation::Normal, sigma_eta),
            InnovationConfig::Uniform { sigma_eta } => (Innovation::Uniform, sigma_eta),
            InnovationConfig::Rademacher { sigma_eta } => (Innovation::Rademacher, sigma_eta),
            InnovationConfig::StudentT { df, sigma_eta } => {
                (Innovation::StudentT { df }, sigma_eta)
            }
        };
        Ok(InnovationSpec::new(law, sigma)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Step {
        knots: Vec<f64>,
        values: Vec<f64>,
        at_zero: f64,
    },
    Power {
        a: f64,
    },
    Poly {
        coeffs: Vec<f64>,
    },
    Indicator {
        t: f64,
    },
}

impl FunctionConfig {
    pub fn to_weight(&self) -> CliResult<WeightFunction> {
        Ok(match self {
            FunctionConfig::Step {
                knots,
                values,
                at_zero,
            } => StepFunction::new(knots.clone(), values.clone(), *at_zero)?.into(),
            FunctionConfig::Power { a } => WeightFunction::power(*a)?,
            FunctionConfig::Poly { coeffs } => WeightFunction::poly(coeffs.clone())?,
            FunctionConfig::Indicator { t } => StepFunction::indicator(*t)?.into(),
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinprocConfig {
    pub n: usize,
    pub seed: u64,
    pub filter: FilterConfig,
    #[serde(default)]
    pub innovations: InnovationConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpmConfig {
    pub n: usize,
    pub seed: u64,
    pub filter: FilterConfig,
    #[serde(default)]
    pub innovations: InnovationConfig,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    pub n: usize,
    pub seed: u64,
    pub filter: FilterConfig,
    #[serde(default)]
    pub innovations: InnovationConfig,
    pub beta: f64,
    pub f: FunctionConfig,
}

/// `simulate` input, selected by the top-level `"mode"` key.
#[derive(Clone, Debug)]
pub enum SimulateConfig {
    Linproc(LinprocConfig),
    Cpm(CpmConfig),
    Regression(RegressionConfig),
}

impl SimulateConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let origin = path.display().to_string();
        let mut value: serde_json::Value = load_json(path)?;
        let mode = match value.as_object_mut().map(|m| m.remove("mode")) {
            Some(Some(serde_json::Value::String(m))) => m,
            Some(Some(_)) => {
                return Err(CliError::invalid(format!(
                    "{origin}: at /mode: expected a string"
                )))
            }
            Some(None) => {
                return Err(CliError::invalid(format!(
                    "{origin}: at /: missing field `mode`"
                )))
            }
            None => {
                return Err(CliError::invalid(format!(
                    "{origin}: at /: expected an object"
                )))
            }
        };
        Ok(match mode.as_str() {
            "linproc" => SimulateConfig::Linproc(from_value(value, &origin)?),
            "cpm" => SimulateConfig::Cpm(from_value(value, &origin)?),
            "regression" => SimulateConfig::Regression(from_value(value, &origin)?),
            other => {
                return Err(CliError::invalid(format!(
                    "{origin}: at /mode: unknown mode `{other}`, expected one of `linproc`, `cpm`, `regression`"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub p: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub reps: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub store_sample: bool,
}

/// Table settings for a study that builds its own table; `p` comes from the
/// study.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTable {
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
}

/// Path to a table file (relative to the config file) or inline settings.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TableSource {
    Path(PathBuf),
    Inline(InlineTable),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ScenarioConfig {
    pub fn model(&self) -> CliResult<ChangeModel> {
        ChangeModel::new(self.tau.clone(), self.beta.clone())
            .map_err(|e| CliError::invalid(format!("scenario {}: {e}", self.id)))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpStudyConfig {
    pub p: f64,
    pub alpha: f64,
    pub filter: FilterConfig,
    #[serde(default)]
    pub innovations: InnovationConfig,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub cv: TableSource,
    pub scenarios: Vec<ScenarioConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressStudyConfig {
    pub beta: f64,
    pub f: FunctionConfig,
    pub filter: FilterConfig,
    #[serde(default)]
    pub innovations: InnovationConfig,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Seed of the exact normal sample used for the KS comparison; defaults
    /// to `seed + 1` so the two samples are independent.
    #[serde(default)]
    pub reference_seed: Option<u64>,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn schema_error(origin: &str, e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let pointer = json_pointer(e.path());
    let pointer = if pointer.is_empty() {
        "/".into()
    } else {
        pointer
    };
    CliError::invalid(format!("{origin}: at {pointer}: {}", e.inner()))
}

/// Parses `text` into `T`, reporting schema errors with a JSON pointer.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error(origin, e))
}

fn from_value<T: DeserializeOwned>(value: serde_json::Value, origin: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| schema_error(origin, e))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json(&text, &path.display().to_string())
}
