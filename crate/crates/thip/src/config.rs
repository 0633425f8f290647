//! Layered run configuration.
//!
//! A [`RunConfig`] comes from a TOML file with one section per concern:
//! `[extraction]` rules, `[reward]` weights, `[gspo]` hyperparameters, an
//! optional `[labeler]` service, `[paths]`, and the `[task]` used for
//! training, plus a top-level `seed`. Every key has a default, unknown keys
//! are rejected, and `THIP_<SECTION>_<KEY>` environment variables override
//! file values (`THIP_SEED` for the top level). List-valued overrides are
//! JSON arrays, for example `THIP_TASK_TEACHER='["a","b"]'`. Values passed
//! explicitly to an accessor, such as a command-line seed, take precedence
//! over both.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::discovery::ProcessTree;
use crate::extract::{self, ExtractionRules, RemoteLabelerConfig};
use crate::gspo::{GspoConfig, RewardWeights, SyntheticTask};

/// Errors raised while loading or interpreting a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The file could not be read.
    #[error("config read error: {0}")]
    Io(#[from] std::io::Error),

    /// The file is not valid TOML or holds unknown keys.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    /// An environment variable with the override prefix names no known key.
    #[error("unknown override variable {0:?}")]
    UnknownEnvKey(String),

    /// An override value could not be parsed for its key.
    #[error("bad value for {key}: {message}")]
    BadEnvValue { key: String, message: String },

    /// A field combination is out of range.
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Prefix for environment-variable overrides.
pub const ENV_PREFIX: &str = "THIP_";

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_teacher() -> Vec<String> {
    ["a", "b", "c"].map(String::from).to_vec()
}

fn default_answer() -> String {
    "4".into()
}

fn default_prompt() -> String {
    "Reason through the teacher's steps, then box the answer.".into()
}

fn default_decoys() -> Vec<String> {
    vec!["0".into()]
}

fn default_weight() -> f64 {
    1.0
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_max_retries() -> u32 {
    3
}

/// `[extraction]`: segmentation and labeling rules. Unset fields fall back
/// to the library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionSection {
    pub delimiters: Option<Vec<String>>,
    pub labels: Option<Vec<(String, String)>>,
    pub default_label: Option<String>,
    pub max_steps: Option<usize>,
}

/// `[reward]`: multipliers for the scalar reward the trainer optimizes.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub format_weight: f64,
    pub answer_weight: f64,
    pub conformance_weight: f64,
}

impl Default for RewardSection {
    fn default() -> Self {
        Self {
            format_weight: default_weight(),
            answer_weight: default_weight(),
            conformance_weight: default_weight(),
        }
    }
}

/// `[gspo]`: optimization hyperparameters. The seed lives at the top level.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GspoSection {
    pub group_size: usize,
    pub clip: f64,
    pub learning_rate: f64,
    pub max_length: usize,
    pub steps: usize,
}

impl Default for GspoSection {
    fn default() -> Self {
        let base = GspoConfig::default();
        Self {
            group_size: base.group_size,
            clip: base.clip,
            learning_rate: base.learning_rate,
            max_length: base.max_length,
            steps: base.steps,
        }
    }
}

/// `[labeler]`: optional remote labeling service.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelerSection {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub auth_token: Option<String>,
}

impl Default for LabelerSection {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            auth_token: None,
        }
    }
}

/// `[paths]`: where inputs are found and outputs land.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Directory that run artifacts are written into.
    pub out_dir: PathBuf,
    /// Optional base directory that relative input paths resolve against.
    pub data_dir: Option<PathBuf>,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            out_dir: default_out_dir(),
            data_dir: None,
        }
    }
}

/// `[task]`: the synthetic training problem.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    /// Teacher activities, executed in sequence.
    pub teacher: Vec<String>,
    pub answer: String,
    pub prompt: String,
    pub decoys: Vec<String>,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            teacher: default_teacher(),
            answer: default_answer(),
            prompt: default_prompt(),
            decoys: default_decoys(),
        }
    }
}

/// A fully layered run configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub extraction: ExtractionSection,
    pub reward: RewardSection,
    pub gspo: GspoSection,
    pub labeler: Option<LabelerSection>,
    pub paths: PathsSection,
    pub task: TaskSection,
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadEnvValue {
        key: key.to_string(),
        message: e.to_string(),
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(key: &str, value: &str) -> Result<T, ConfigError> {
    serde_json::from_str(value).map_err(|e| ConfigError::BadEnvValue {
        key: key.to_string(),
        message: format!("expected a JSON value: {e}"),
    })
}

impl RunConfig {
    /// Parses a TOML document. Unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path`, applies `THIP_*` overrides from the process
    /// environment, and validates the result.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml(&text)?;
        config.apply_env_overrides(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    /// The defaults with process-environment overrides applied, for
    /// commands run without a config file.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.apply_env_overrides(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    /// Applies every `THIP_*` variable in `vars` onto this configuration.
    /// Unknown keys and unparsable values are errors.
    pub fn apply_env_overrides<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            self.apply_one(&name, key, &value)?;
        }
        Ok(())
    }

    fn apply_one(&mut self, name: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "SEED" => self.seed = Some(parse_scalar(name, value)?),
            "EXTRACTION_DELIMITERS" => self.extraction.delimiters = Some(parse_json(name, value)?),
            "EXTRACTION_LABELS" => self.extraction.labels = Some(parse_json(name, value)?),
            "EXTRACTION_DEFAULT_LABEL" => {
                self.extraction.default_label = Some(value.to_string());
            }
            "EXTRACTION_MAX_STEPS" => self.extraction.max_steps = Some(parse_scalar(name, value)?),
            "REWARD_FORMAT_WEIGHT" => self.reward.format_weight = parse_scalar(name, value)?,
            "REWARD_ANSWER_WEIGHT" => self.reward.answer_weight = parse_scalar(name, value)?,
            "REWARD_CONFORMANCE_WEIGHT" => {
                self.reward.conformance_weight = parse_scalar(name, value)?;
            }
            "GSPO_GROUP_SIZE" => self.gspo.group_size = parse_scalar(name, value)?,
            "GSPO_CLIP" => self.gspo.clip = parse_scalar(name, value)?,
            "GSPO_LEARNING_RATE" => self.gspo.learning_rate = parse_scalar(name, value)?,
            "GSPO_MAX_LENGTH" => self.gspo.max_length = parse_scalar(name, value)?,
            "GSPO_STEPS" => self.gspo.steps = parse_scalar(name, value)?,
            "LABELER_ENDPOINT" => {
                self.labeler.get_or_insert_with(Default::default).endpoint = value.to_string();
            }
            "LABELER_TIMEOUT_MS" => {
                self.labeler.get_or_insert_with(Default::default).timeout_ms =
                    parse_scalar(name, value)?;
            }
            "LABELER_MAX_RETRIES" => {
                self.labeler.get_or_insert_with(Default::default).max_retries =
                    parse_scalar(name, value)?;
            }
            "LABELER_AUTH_TOKEN" => {
                self.labeler.get_or_insert_with(Default::default).auth_token =
                    Some(value.to_string());
            }
            "PATHS_OUT_DIR" => self.paths.out_dir = PathBuf::from(value),
            "PATHS_DATA_DIR" => self.paths.data_dir = Some(PathBuf::from(value)),
            "TASK_TEACHER" => self.task.teacher = parse_json(name, value)?,
            "TASK_ANSWER" => self.task.answer = value.to_string(),
            "TASK_PROMPT" => self.task.prompt = value.to_string(),
            "TASK_DECOYS" => self.task.decoys = parse_json(name, value)?,
            _ => return Err(ConfigError::UnknownEnvKey(name.to_string())),
        }
        Ok(())
    }

    /// Checks every section eagerly so failures surface at load time.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.to_rules()?;
        self.reward_weights()?;
        self.gspo_config(None)?;
        self.to_task()?;
        self.labeler_config()?;
        if self.paths.out_dir.exists() && !self.paths.out_dir.is_dir() {
            return Err(ConfigError::Invalid(format!(
                "out_dir {:?} exists and is not a directory",
                self.paths.out_dir
            )));
        }
        if let Some(dir) = &self.paths.data_dir {
            if !dir.is_dir() {
                return Err(ConfigError::Invalid(format!(
                    "data_dir {dir:?} is not an existing directory"
                )));
            }
        }
        Ok(())
    }

    /// Compiled extraction rules, falling back to library defaults per
    /// unset field.
    pub fn to_rules(&self) -> Result<ExtractionRules, ConfigError> {
        let delimiters = self
            .extraction
            .delimiters
            .clone()
            .unwrap_or_else(extract::default_delimiters);
        let labels = self
            .extraction
            .labels
            .clone()
            .unwrap_or_else(extract::default_label_rules);
        let default_label = self
            .extraction
            .default_label
            .clone()
            .unwrap_or_else(|| extract::DEFAULT_STEP_LABEL.to_string());
        let max_steps = self.extraction.max_steps.unwrap_or(extract::DEFAULT_MAX_STEPS);
        ExtractionRules::new(&delimiters, &labels, default_label, max_steps)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The trainer's reward weights.
    pub fn reward_weights(&self) -> Result<RewardWeights, ConfigError> {
        let weights = RewardWeights {
            format: self.reward.format_weight,
            answer: self.reward.answer_weight,
            conformance: self.reward.conformance_weight,
        };
        weights
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(weights)
    }

    /// Optimization hyperparameters. `seed_override` wins over the config
    /// seed, which wins over zero.
    pub fn gspo_config(&self, seed_override: Option<u64>) -> Result<GspoConfig, ConfigError> {
        let config = GspoConfig {
            group_size: self.gspo.group_size,
            clip: self.gspo.clip,
            learning_rate: self.gspo.learning_rate,
            max_length: self.gspo.max_length,
            steps: self.gspo.steps,
            seed: seed_override.or(self.seed).unwrap_or(0),
        };
        config
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }

    /// The synthetic training task described by `[task]`.
    pub fn to_task(&self) -> Result<SyntheticTask, ConfigError> {
        if self.task.teacher.is_empty() {
            return Err(ConfigError::Invalid(
                "task teacher must list at least one activity".into(),
            ));
        }
        let children = self
            .task
            .teacher
            .iter()
            .map(ProcessTree::leaf)
            .collect::<Vec<_>>();
        let teacher = if children.len() == 1 {
            children.into_iter().next().expect("one child")
        } else {
            ProcessTree::Sequence(children)
        };
        let task = SyntheticTask::new(teacher, &self.task.answer, &self.task.prompt)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let decoys: Vec<&str> = self.task.decoys.iter().map(String::as_str).collect();
        task.with_decoys(&decoys)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Remote labeler settings when `[labeler]` is present.
    pub fn labeler_config(&self) -> Result<Option<RemoteLabelerConfig>, ConfigError> {
        let Some(section) = &self.labeler else {
            return Ok(None);
        };
        if section.endpoint.trim().is_empty() {
            return Err(ConfigError::Invalid(
                "labeler endpoint must not be empty".into(),
            ));
        }
        let mut config = RemoteLabelerConfig::new(section.endpoint.clone());
        config.timeout = Duration::from_millis(section.timeout_ms);
        config.max_retries = section.max_retries;
        config.auth_token = section.auth_token.clone();
        Ok(Some(config))
    }

    /// Resolves an input path against `data_dir` when it is relative.
    pub fn resolve_input(&self, path: &Path) -> PathBuf {
        match &self.paths.data_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.paths.out_dir
    }
}
