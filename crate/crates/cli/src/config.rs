//! Experiment configuration: a flat TOML file plus flag overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use assortment_core::choice::AdversaryKind;
use assortment_core::simulator::{ExperimentConfig, PolicyName};

use crate::{CliError, CliResult};

fn default_policies() -> Vec<String> {
    vec!["active_elim".into()]
}

fn default_adversary() -> String {
    "front_loaded".into()
}

fn default_trials() -> usize {
    20
}

/// One experiment file. Flat keys, typed values; unknown keys are rejected
/// so typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of products.
    pub n: usize,
    /// Assortment capacity.
    pub k: usize,
    /// Selling horizon.
    pub t: usize,
    /// True outlier proportion driving the adversary.
    #[serde(default)]
    pub eps: f64,
    /// Assumed proportion for the elimination policy (defaults to eps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_bar: Option<f64>,
    /// Scale on the theoretical initial epoch length T_0 (defaults to an
    /// initial epoch of about T/64).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explore_scale: Option<f64>,
    /// Confidence-radius multiplier for the UCB baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ucb_c1: Option<f64>,
    /// Policies to run: active_elim, adaptive, ucb, ts, oracle.
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    /// Contamination pattern: none, front_loaded, adaptive_hook.
    #[serde(default = "default_adversary")]
    pub adversary: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Emit every period instead of the 50-point reporting grid.
    #[serde(default)]
    pub full_trace: bool,
    /// Aggregate checkpoints (defaults to T/4, T/2, 3T/4, T).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
}

/// Flag overrides applied on top of the config file (or of the defaults
/// when no file is given).
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub policy: Option<String>,
    pub eps: Option<f64>,
    pub eps_bar: Option<f64>,
    pub explore_scale: Option<f64>,
    pub ucb_c1: Option<f64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub full_trace: bool,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
            .map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
    }

    /// Parses a config; toml errors carry line/column context.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds a config from flags alone; n, k and t are required then.
    pub fn from_overrides(ov: &Overrides) -> CliResult<Self> {
        let need = |name: &str, v: Option<usize>| {
            v.ok_or_else(|| {
                CliError::Usage(format!(
                    "missing required field `{name}` (pass --{name} or use --config)"
                ))
            })
        };
        let mut config = RunConfig {
            n: need("n", ov.n)?,
            k: need("k", ov.k)?,
            t: need("t", ov.t)?,
            eps: 0.0,
            eps_bar: None,
            explore_scale: None,
            ucb_c1: None,
            policies: default_policies(),
            adversary: default_adversary(),
            trials: default_trials(),
            seed: 0,
            full_trace: false,
            checkpoints: None,
        };
        config.apply(ov);
        Ok(config)
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(p) = &ov.policy {
            self.policies = vec![p.clone()];
        }
        if let Some(x) = ov.eps {
            self.eps = x;
        }
        if let Some(x) = ov.eps_bar {
            self.eps_bar = Some(x);
        }
        if let Some(x) = ov.explore_scale {
            self.explore_scale = Some(x);
        }
        if let Some(x) = ov.ucb_c1 {
            self.ucb_c1 = Some(x);
        }
        if let Some(x) = ov.n {
            self.n = x;
        }
        if let Some(x) = ov.k {
            self.k = x;
        }
        if let Some(x) = ov.t {
            self.t = x;
        }
        if let Some(x) = ov.trials {
            self.trials = x;
        }
        if let Some(x) = ov.seed {
            self.seed = x;
        }
        if ov.full_trace {
            self.full_trace = true;
        }
    }

    pub fn adversary_kind(&self) -> CliResult<AdversaryKind> {
        match self.adversary.as_str() {
            "none" => Ok(AdversaryKind::None),
            "front_loaded" => Ok(AdversaryKind::FrontLoaded),
            "adaptive_hook" => Ok(AdversaryKind::AdaptiveHook),
            other => Err(CliError::Usage(format!(
                "field `adversary`: unknown kind \"{other}\" (expected none, front_loaded or adaptive_hook)"
            ))),
        }
    }

    /// The per-policy experiment this config describes.
    pub fn experiment_for(&self, policy: &str) -> CliResult<ExperimentConfig> {
        let policy = PolicyName::parse(policy)
            .map_err(|e| CliError::Usage(format!("field `policies`: {e}")))?;
        let config = ExperimentConfig {
            n_items: self.n,
            capacity: self.k,
            horizon: self.t,
            epsilon: self.eps,
            adversary: self.adversary_kind()?,
            policy,
            eps_bar: self.eps_bar,
            explore_scale: self.explore_scale,
            ucb_c1: self.ucb_c1,
            trials: self.trials,
            seed: self.seed,
            checkpoints: self.checkpoints.clone(),
        };
        config.validate().map_err(CliError::from)?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.policies.is_empty() {
            return Err(CliError::Usage(
                "field `policies` must name at least one policy".into(),
            ));
        }
        for policy in &self.policies {
            self.experiment_for(policy)?;
        }
        Ok(())
    }
}
