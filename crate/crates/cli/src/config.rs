//! Declarative scenario document.
//!
//! Every section is optional; each subcommand checks for the sections it
//! needs. Unknown keys are rejected so typos do not silently fall back to
//! defaults.

use mttdl_core::allocation::Policy;
use mttdl_core::growth::{build_lambda_vector, GrowthSpec, RepairMode};
use mttdl_core::hard_error::{apply_hard_error, eta, UcerSpec};
use mttdl_core::montecarlo::DEFAULT_EVENT_CAP;
use mttdl_core::overhead::CodeProfileRecord;
use mttdl_core::{FailureModel, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epg: Option<EpgConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhead: Option<OverheadConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pyramid: Option<PyramidConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<AllocationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpgConfig {
    pub m: usize,
    pub p: usize,
    pub lambda: LambdaConfig,
    pub mu: MuConfig,
    #[serde(default)]
    pub repair_mode: RepairMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_error: Option<HardErrorConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaConfig {
    Growth(GrowthConfig),
    /// `[λ_0, …, λ_p]` per-disk rates.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub lambda0: f64,
    #[serde(default)]
    pub r: f64,
    /// `null` or absent means no cap.
    #[serde(default)]
    pub lambda_max: Option<f64>,
}

/// Nominal repair rates; `repair_mode` maps them onto chain transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MuConfig {
    Constant(f64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HardErrorConfig {
    Eta(f64),
    Ucer { ucer: f64, capacity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events_per_trial: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    R,
    P,
    M,
    Eta,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::R => "r",
            SweepVariable::P => "p",
            SweepVariable::M => "m",
            SweepVariable::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Parity counts evaluated at each value; defaults to `1..=epg.p`.
    /// Ignored when sweeping `p` itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parities: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Per-data-block access set sizes; all `m` (MDS) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_sizes: Option<Vec<usize>>,
    /// Built-in profile name or inline profile; overrides `n`/`m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Builtin(String),
    Inline(CodeProfileRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyramidConfig {
    /// Nominal per-device repair rate.
    pub mu: f64,
    pub eta: f64,
    /// Repair bandwidth constant of the non-baseline codes.
    pub delta: f64,
    /// Repair bandwidth constant of the baseline code.
    #[serde(default = "one")]
    pub baseline_delta: f64,
    pub lambdas: Vec<f64>,
    /// Defaults to the four built-in (18,12) profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<ProfileRef>>,
    /// Profile whose read overhead is the reference; defaults to the
    /// built-in MDS profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default)]
    pub repair_mode: RepairMode,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationConfig {
    /// Node count, also the group size `n`.
    pub z: usize,
    pub weibull_k: f64,
    pub parities: Vec<usize>,
    pub r_values: Vec<f64>,
    pub lambda0: f64,
    #[serde(default)]
    pub lambda_max: Option<f64>,
    pub mu: f64,
    #[serde(default = "both_policies")]
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub repair_mode: RepairMode,
}

fn both_policies() -> Vec<Policy> {
    vec![Policy::Horizontal, Policy::Vertical]
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn at(path: &str) -> impl Fn(mttdl_core::Error) -> CliError + '_ {
    move |e| CliError::Invalid {
        path: path.into(),
        message: e.to_string(),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn epg(&self) -> Result<&EpgConfig, CliError> {
        self.epg.as_ref().ok_or_else(|| invalid("epg", "section is required"))
    }

    pub fn sim_config(&self, seed_override: Option<u64>) -> Result<Option<SimConfig>, CliError> {
        let Some(mc) = &self.monte_carlo else {
            return Ok(None);
        };
        if mc.trials < 1 {
            return Err(invalid("monte_carlo.trials", "must be at least 1"));
        }
        let cap = mc.max_events_per_trial.unwrap_or(DEFAULT_EVENT_CAP);
        if cap < 1 {
            return Err(invalid("monte_carlo.max_events_per_trial", "must be at least 1"));
        }
        Ok(Some(SimConfig {
            trials: mc.trials,
            seed: seed_override.unwrap_or(mc.seed),
            max_events_per_trial: cap,
        }))
    }
}

impl GrowthConfig {
    pub fn spec(&self, path: &str) -> Result<GrowthSpec, CliError> {
        GrowthSpec::new(self.lambda0, self.r, self.lambda_max).map_err(at(path))
    }
}

/// Parameters that a sweep may override on top of the `epg` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub r: Option<f64>,
    pub eta: Option<f64>,
}

impl EpgConfig {
    /// Builds the chain, applying growth, repair mode and hard errors.
    pub fn model(&self, o: Overrides) -> Result<FailureModel, CliError> {
        let m = o.m.unwrap_or(self.m);
        let p = o.p.unwrap_or(self.p);
        if m < 1 {
            return Err(invalid("epg.m", "must be at least 1"));
        }
        if p < 1 {
            return Err(invalid("epg.p", "must be at least 1"));
        }
        let lambda = match &self.lambda {
            LambdaConfig::Growth(g) => {
                let mut g = g.clone();
                if let Some(r) = o.r {
                    g.r = r;
                }
                build_lambda_vector(&g.spec("epg.lambda.growth")?, p).map_err(at("epg.lambda.growth"))?
            }
            LambdaConfig::Explicit(v) => {
                if o.r.is_some() {
                    return Err(invalid("epg.lambda", "sweeping r needs a growth law"));
                }
                if v.len() != p + 1 {
                    return Err(invalid(
                        "epg.lambda.explicit",
                        format!("has {} entries, p + 1 = {} needed", v.len(), p + 1),
                    ));
                }
                v.clone()
            }
        };
        let nominal = match &self.mu {
            MuConfig::Constant(x) => vec![*x; p],
            MuConfig::Explicit(v) => {
                if v.len() != p {
                    return Err(invalid(
                        "epg.mu.explicit",
                        format!("has {} entries, p = {p} needed", v.len()),
                    ));
                }
                v.clone()
            }
        };
        let mu = self.repair_mode.chain_rates(&nominal);
        let gamma = match &self.gamma {
            Some(g) if g.len() != p => {
                return Err(invalid("epg.gamma", format!("has {} entries, p = {p} needed", g.len())))
            }
            Some(g) => g.clone(),
            None => vec![0.0; p],
        };
        let model = FailureModel::new(m + p, m, lambda, mu, gamma).map_err(at("epg"))?;
        let eta_value = match (o.eta, &self.hard_error) {
            (Some(e), _) => Some(e),
            (None, Some(HardErrorConfig::Eta(e))) => Some(*e),
            (None, Some(HardErrorConfig::Ucer { ucer, capacity })) => {
                Some(eta(&UcerSpec::new(*ucer, *capacity).map_err(at("epg.hard_error.ucer"))?))
            }
            (None, None) => None,
        };
        match eta_value {
            Some(e) => apply_hard_error(&model, e).map_err(at("epg.hard_error")),
            None => Ok(model),
        }
    }
}
