use std::path::Path;

use msnet_core::asymptotics::AsymptoteSpec;
use msnet_core::estimation::hcheck::{WorkloadVector, DEFAULT_MIN_EXCEEDANCES};
use msnet_core::estimation::HorizonPolicy;
use msnet_core::models::ModelSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Needed by every subcommand except `hcheck`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub horizon: HorizonPolicy,
    #[serde(default)]
    pub axioms: AxiomsSection,
    #[serde(default)]
    pub gamma0: Gamma0Section,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub tail: Option<TailSection>,
    #[serde(default)]
    pub asymptote: Option<AsymptoteSection>,
    #[serde(default)]
    pub moments: MomentsSection,
    #[serde(default)]
    pub bigjump: Option<BigJumpSection>,
    #[serde(default)]
    pub hcheck: Option<HCheckSection>,
    #[serde(default)]
    pub insensitivity: Option<InsensitivitySection>,
    /// Dump the event log of one window (Jackson models only).
    #[serde(default)]
    pub event_log: Option<EventLogSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxiomsSection {
    pub windows: u64,
    pub max_len: usize,
}

impl Default for AxiomsSection {
    fn default() -> Self {
        AxiomsSection { windows: 500, max_len: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gamma0Section {
    pub n: usize,
    pub replications: usize,
    /// Allowed relative error against the closed-form reference.
    pub rel_tol: f64,
}

impl Default for Gamma0Section {
    fn default() -> Self {
        Gamma0Section { n: 1000, replications: 200, rel_tol: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyword {
    Auto,
    None,
    W2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LChoice {
    Fixed(usize),
    Keyword(Keyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    /// Block length, or "auto".
    pub l: LChoice,
    pub delta: f64,
    /// Replications per step of the `L` scan.
    pub scan_replications: usize,
    pub blocks: usize,
    pub realizations: u64,
    /// Also run the suite at `2 L`.
    pub double: bool,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            l: LChoice::Keyword(Keyword::Auto),
            delta: 0.1,
            scan_replications: 200,
            blocks: 8,
            realizations: 10_000,
            double: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormulaChoice {
    Keyword(Keyword),
    Spec(AsymptoteSpec),
}

impl Default for FormulaChoice {
    fn default() -> Self {
        FormulaChoice::Keyword(Keyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// The maximal dater `Z`.
    #[default]
    Response,
    /// Waiting time at the second station of a tandem.
    SecondStationWait,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSection {
    pub grid: Vec<f64>,
    pub replications: u64,
    #[serde(default)]
    pub formula: FormulaChoice,
    #[serde(default)]
    pub functional: Functional,
    /// When set, the ratio at the deepest level with `min_exceedances`
    /// hits must fall in this band.
    #[serde(default)]
    pub ratio_band: Option<(f64, f64)>,
    #[serde(default = "default_min_exceedances")]
    pub min_exceedances: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteSection {
    pub grid: Vec<f64>,
    #[serde(default)]
    pub formula: FormulaChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsSection {
    /// Pareto index of the services; read from the model when omitted.
    pub service_index: Option<f64>,
    pub samples: u64,
    pub k: usize,
}

impl Default for MomentsSection {
    fn default() -> Self {
        MomentsSection { service_index: None, samples: 1_000_000, k: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BigJumpSection {
    /// Level to condition on; alternatively `formula_level`.
    #[serde(default)]
    pub x: Option<f64>,
    /// Condition on the largest `x` whose formula value is at least this.
    #[serde(default)]
    pub formula_level: Option<f64>,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// Threshold the pass/fail check is read at.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_target")]
    pub target: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_min_one")]
    pub min_one: f64,
    #[serde(default = "default_max_two")]
    pub max_two: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HCheckSection {
    pub vector: WorkloadVector,
    pub grid: Vec<f64>,
    pub samples: u64,
    #[serde(default = "default_min_exceedances")]
    pub min_exceedances: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsensitivitySection {
    /// Mean interarrival time; the model's when omitted.
    #[serde(default)]
    pub a: Option<f64>,
    pub grid: Vec<f64>,
    pub replications: u64,
    #[serde(default = "default_min_exceedances")]
    pub min_exceedances: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventLogSection {
    pub customers: usize,
}

fn default_min_exceedances() -> u64 {
    DEFAULT_MIN_EXCEEDANCES
}
fn default_thetas() -> Vec<f64> {
    msnet_core::estimation::bigjump::DEFAULT_THETAS.to_vec()
}
fn default_theta() -> f64 {
    msnet_core::estimation::bigjump::DEFAULT_THETA
}
fn default_target() -> u64 {
    1000
}
fn default_budget() -> u64 {
    10_000_000
}
fn default_min_one() -> f64 {
    0.8
}
fn default_max_two() -> f64 {
    0.1
}

/// A parsed configuration and the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            serde_json::from_slice(bytes).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.horizon.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let sha256 = format!("{:x}", Sha256::digest(bytes));
        Ok(LoadedConfig { config, sha256 })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}
