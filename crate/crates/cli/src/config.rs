//! Run configuration: a single JSON document with model, timing, analysis,
//! and simulation blocks. Unknown keys are rejected and every validation
//! failure names the offending field path.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use tradetail_core::tail::{IimTiming, ItmTiming, TailSide, TimingError, TimingModel};
use tradetail_core::{JumpLaw, ModulatedModel, TransitionJump};

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLawConfig {
    Degenerate {
        size: f64,
    },
    Gaussian {
        mean: f64,
        variance: f64,
    },
    TwoPoint {
        first: f64,
        prob_first: f64,
        second: f64,
    },
}

impl JumpLawConfig {
    fn build(&self) -> JumpLaw {
        match *self {
            JumpLawConfig::Degenerate { size } => JumpLaw::Degenerate { size },
            JumpLawConfig::Gaussian { mean, variance } => JumpLaw::Gaussian { mean, variance },
            JumpLawConfig::TwoPoint {
                first,
                prob_first,
                second,
            } => JumpLaw::TwoPoint {
                first,
                prob_first,
                second,
            },
        }
    }

    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        match *self {
            JumpLawConfig::Gaussian { variance, .. } if variance < 0.0 => Err(err(
                format!("{path}.variance"),
                format!("variance {variance} must be nonnegative"),
            )),
            JumpLawConfig::TwoPoint { prob_first, .. } if !(0.0..=1.0).contains(&prob_first) => {
                Err(err(
                    format!("{path}.prob_first"),
                    format!("probability {prob_first} must lie in [0,1]"),
                ))
            }
            _ => Ok(()),
        }
    }
}

fn default_jump_law() -> JumpLawConfig {
    JumpLawConfig::Degenerate { size: 0.0 }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub drift: f64,
    pub diffusion_var: f64,
    #[serde(default)]
    pub jump_intensity: f64,
    #[serde(default = "default_jump_law")]
    pub jump_law: JumpLawConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SwitchJumpConfig {
    pub from: usize,
    pub to: usize,
    pub probability: f64,
    pub jump_law: JumpLawConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub regimes: Vec<RegimeConfig>,
    pub generator: Vec<Vec<f64>>,
    #[serde(default)]
    pub switch_jumps: Vec<SwitchJumpConfig>,
    pub initial_distribution: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimingConfig {
    Iim {
        probabilities: Vec<f64>,
        weights: Vec<f64>,
        #[serde(default = "default_trade_count")]
        trade_count: u32,
    },
    Itm {
        arrival_rates: Vec<f64>,
        weights: Vec<f64>,
        #[serde(default)]
        completion_rates: Vec<f64>,
    },
}

fn default_trade_count() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TailSideConfig {
    Upper,
    Lower,
}

impl TailSideConfig {
    pub fn to_core(self) -> TailSide {
        match self {
            TailSideConfig::Upper => TailSide::Upper,
            TailSideConfig::Lower => TailSide::Lower,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_hill_rel")]
    pub hill_relative: f64,
    #[serde(default = "default_scale_rel")]
    pub scale_relative: f64,
    #[serde(default = "default_corr_abs")]
    pub correction_absolute: f64,
}

fn default_hill_rel() -> f64 {
    0.10
}
fn default_scale_rel() -> f64 {
    0.25
}
fn default_corr_abs() -> f64 {
    0.4
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            hill_relative: default_hill_rel(),
            scale_relative: default_scale_rel(),
            correction_absolute: default_corr_abs(),
        }
    }
}

/// Partial tolerance override accepted on the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverride {
    pub hill_relative: Option<f64>,
    pub scale_relative: Option<f64>,
    pub correction_absolute: Option<f64>,
}

impl ToleranceConfig {
    pub fn merged(&self, over: &ToleranceOverride) -> ToleranceConfig {
        ToleranceConfig {
            hill_relative: over.hill_relative.unwrap_or(self.hill_relative),
            scale_relative: over.scale_relative.unwrap_or(self.scale_relative),
            correction_absolute: over.correction_absolute.unwrap_or(self.correction_absolute),
        }
    }

    pub fn to_core(&self) -> tradetail_core::Tolerances {
        tradetail_core::Tolerances {
            hill_relative: self.hill_relative,
            scale_relative: self.scale_relative,
            correction_absolute: self.correction_absolute,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_alpha_max")]
    pub alpha_max: f64,
    #[serde(default = "default_tail_side")]
    pub tail_side: TailSideConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn default_alpha_max() -> f64 {
    50.0
}
fn default_tail_side() -> TailSideConfig {
    TailSideConfig::Upper
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha_max: default_alpha_max(),
            tail_side: default_tail_side(),
            tolerances: ToleranceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub streams: u32,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
}

fn default_count() -> usize {
    1_000_000
}
fn default_seed() -> u64 {
    42
}
fn default_streams() -> u32 {
    8
}
fn default_grid_step() -> f64 {
    1.0
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            count: default_count(),
            seed: default_seed(),
            streams: default_streams(),
            grid_step: default_grid_step(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub timing: TimingConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        config.validate_semantics()?;
        Ok(config)
    }

    /// Canonical serialized form; parsing then serializing is idempotent.
    pub fn canonical(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    pub fn config_hash(&self) -> u64 {
        fnv1a64(self.canonical().as_bytes())
    }

    pub fn model_hash(&self) -> u64 {
        fnv1a64(
            serde_json::to_string(&self.model)
                .expect("model serializes")
                .as_bytes(),
        )
    }

    fn validate_semantics(&self) -> Result<(), ConfigError> {
        let n = self.model.regimes.len();
        for (i, regime) in self.model.regimes.iter().enumerate() {
            if regime.diffusion_var < 0.0 {
                return Err(err(
                    format!("model.regimes[{i}].diffusion_var"),
                    "must be nonnegative",
                ));
            }
            if regime.jump_intensity < 0.0 {
                return Err(err(
                    format!("model.regimes[{i}].jump_intensity"),
                    "must be nonnegative",
                ));
            }
            regime
                .jump_law
                .validate(&format!("model.regimes[{i}].jump_law"))?;
        }
        if self.model.generator.len() != n {
            return Err(err(
                "model.generator",
                format!("expected {n} rows to match the regime count"),
            ));
        }
        for (i, row) in self.model.generator.iter().enumerate() {
            if row.len() != n {
                return Err(err(
                    format!("model.generator[{i}]"),
                    format!("expected {n} entries"),
                ));
            }
        }
        if self.model.initial_distribution.len() != n {
            return Err(err(
                "model.initial_distribution",
                format!("expected {n} entries"),
            ));
        }
        for (i, jump) in self.model.switch_jumps.iter().enumerate() {
            if jump.from >= n || jump.to >= n {
                return Err(err(
                    format!("model.switch_jumps[{i}]"),
                    format!("regime indices must be below {n}"),
                ));
            }
            if jump.from == jump.to {
                return Err(err(
                    format!("model.switch_jumps[{i}]"),
                    "diagonal switch jumps are not allowed",
                ));
            }
            if !(0.0..=1.0).contains(&jump.probability) {
                return Err(err(
                    format!("model.switch_jumps[{i}].probability"),
                    "must lie in [0,1]",
                ));
            }
            jump.jump_law
                .validate(&format!("model.switch_jumps[{i}].jump_law"))?;
        }
        if self.analysis.alpha_max <= 0.0 || self.analysis.alpha_max.is_nan() {
            return Err(err("analysis.alpha_max", "must be positive"));
        }
        if self.simulation.count == 0 {
            return Err(err("simulation.count", "must be at least 1"));
        }
        if self.simulation.streams == 0 {
            return Err(err("simulation.streams", "must be at least 1"));
        }
        if self.simulation.grid_step <= 0.0 || self.simulation.grid_step.is_nan() {
            return Err(err("simulation.grid_step", "must be positive"));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<ModulatedModel, ConfigError> {
        let n = self.model.regimes.len();
        let regimes = self
            .model
            .regimes
            .iter()
            .map(|r| tradetail_core::RegimeExponent {
                drift: r.drift,
                diffusion_var: r.diffusion_var,
                jump_intensity: r.jump_intensity,
                jump_law: r.jump_law.build(),
            })
            .collect();
        let generator = DMatrix::from_fn(n, n, |j, k| self.model.generator[j][k]);
        let initial = DVector::from_vec(self.model.initial_distribution.clone());
        let mut model =
            ModulatedModel::new(regimes, generator, initial).map_err(|e| model_error_path(&e))?;
        for jump in &self.model.switch_jumps {
            model = model
                .with_switch_jump(
                    jump.from,
                    jump.to,
                    TransitionJump {
                        probability: jump.probability,
                        jump_law: jump.jump_law.build(),
                    },
                )
                .map_err(|e| model_error_path(&e))?;
        }
        Ok(model)
    }

    pub fn build_timing(&self) -> Result<TimingModel, ConfigError> {
        match &self.timing {
            TimingConfig::Iim {
                probabilities,
                weights,
                trade_count,
            } => IimTiming::new(probabilities.clone(), weights.clone(), *trade_count)
                .map(TimingModel::Iim)
                .map_err(|e| timing_error_path(&e, "probabilities")),
            TimingConfig::Itm {
                arrival_rates,
                weights,
                completion_rates,
            } => ItmTiming::new(
                arrival_rates.clone(),
                weights.clone(),
                completion_rates.clone(),
            )
            .map(TimingModel::Itm)
            .map_err(|e| timing_error_path(&e, "arrival_rates")),
        }
    }
}

fn model_error_path(e: &tradetail_core::ModelError) -> ConfigError {
    use tradetail_core::ModelError as M;
    let path = match e {
        M::BadRegimeCount(_) => "model.regimes",
        M::BadGeneratorShape { .. } => "model.generator",
        M::RowSumNonZero { .. } => "model.generator",
        M::NegativeOffDiagonal { .. } => "model.generator",
        M::NotIrreducible => "model.generator",
        M::NegativeInitialWeight { .. } | M::InitialNotNormalized { .. } => {
            "model.initial_distribution"
        }
        M::NegativeVariance(_) | M::NegativeIntensity(_) | M::BadJumpProbability(_) => {
            "model.regimes"
        }
        M::BadSwitchProbability(_) | M::DiagonalSwitchJump(_) | M::SwitchIndexOutOfRange { .. } => {
            "model.switch_jumps"
        }
    };
    err(path, e.to_string())
}

fn timing_error_path(e: &TimingError, ordered_field: &str) -> ConfigError {
    use TimingError as T;
    let path = match e {
        T::Empty => format!("timing.{ordered_field}"),
        T::ProbabilityOutOfRange { index, .. } => format!("timing.probabilities[{index}]"),
        T::NotStrictlyIncreasing { index } => format!("timing.{ordered_field}[{index}]"),
        T::WeightCount { .. } | T::WeightsNotNormalized { .. } => "timing.weights".into(),
        T::NonPositiveWeight { index, .. } => format!("timing.weights[{index}]"),
        T::ZeroTradeCount => "timing.trade_count".into(),
        T::NonPositiveRate { index, .. } => format!("timing.arrival_rates[{index}]"),
        T::NonPositiveCompletionRate { index, .. } => {
            format!("timing.completion_rates[{index}]")
        }
        T::CompletionCapExceeded { .. } => "timing.completion_rates".into(),
    };
    err(path, e.to_string())
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SCALAR_IIM: &str = r#"{
        "model": {
            "regimes": [{"drift": 0.0, "diffusion_var": 1.0}],
            "generator": [[0.0]],
            "initial_distribution": [1.0]
        },
        "timing": {"family": "iim", "probabilities": [0.39346934028736658], "weights": [1.0]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let config = RunConfig::parse(SCALAR_IIM).unwrap();
        let canonical = config.canonical();
        let reparsed = RunConfig::parse(&canonical).unwrap();
        assert_eq!(config, reparsed);
        assert_eq!(canonical, reparsed.canonical());
        assert_eq!(config.config_hash(), reparsed.config_hash());
    }

    #[test]
    fn unknown_keys_are_rejected_with_paths() {
        let bad = r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0, "volatility": 3.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [0.2], "weights": [1.0]}
        }"#;
        let e = RunConfig::parse(bad).unwrap_err();
        assert!(e.path.contains("model.regimes[0]"), "path was {}", e.path);
    }

    #[test]
    fn out_of_range_probability_names_the_field() {
        let bad = r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [1.0], "weights": [1.0]}
        }"#;
        let config = RunConfig::parse(bad).unwrap();
        let e = config.build_timing().unwrap_err();
        assert_eq!(e.path, "timing.probabilities[0]");
    }

    #[test]
    fn generator_errors_name_the_block() {
        let bad = r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0},
                            {"drift": 0.1, "diffusion_var": 0.5}],
                "generator": [[-1.0, 1.0], [0.5, -1.0]],
                "initial_distribution": [0.5, 0.5]
            },
            "timing": {"family": "iim", "probabilities": [0.2], "weights": [1.0]}
        }"#;
        let config = RunConfig::parse(bad).unwrap();
        let e = config.build_model().unwrap_err();
        assert_eq!(e.path, "model.generator");
    }
}
