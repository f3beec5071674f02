//! Experiment configuration: one JSON document drives corpus generation,
//! policy grids, the redundancy study, and sampler training. Every report
//! echoes the fully resolved config, so outputs are self-describing.

use serde::{Deserialize, Serialize};

use crate::classifier::{make_prototypes, ClassifierKind, ClassifierSpec, GeneratorConfig};
use crate::error::{Error, Result};
use crate::policies::{AggregationMode, PolicyKind, DEFAULT_ENUMERATION_BUDGET};
use crate::redundancy::KernelConfig;
use crate::sampler::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub interaction_strength: f64,
    pub temperature: f64,
    /// Bandwidth of the pairwise-similarity kernel used by the penalized
    /// kind.
    pub kernel_sigma: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Additive,
            interaction_strength: 0.5,
            temperature: 1.0,
            kernel_sigma: 1.4,
        }
    }
}

impl ClassifierConfig {
    pub fn build(&self, generator: &GeneratorConfig) -> Result<ClassifierSpec> {
        let prototypes = make_prototypes(
            generator.feature_dim,
            generator.num_classes,
            generator.prototype_seed,
        )?;
        match self.kind {
            ClassifierKind::Additive => ClassifierSpec::additive(prototypes, self.temperature),
            ClassifierKind::RedundancyPenalized => ClassifierSpec::redundancy_penalized(
                prototypes,
                self.interaction_strength,
                self.temperature,
                KernelConfig::scalar(self.kernel_sigma),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidConfig("classifier temperature must be > 0".into()));
        }
        if !(self.interaction_strength >= 0.0) {
            return Err(Error::InvalidConfig("interaction strength must be >= 0".into()));
        }
        if !(self.kernel_sigma > 0.0) {
            return Err(Error::InvalidConfig("kernel sigma must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: usize,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyGridConfig {
    /// Generator template; `num_frames` is overridden by each cell's T.
    pub generator: GeneratorConfig,
    pub classifier: ClassifierConfig,
    pub cells: Vec<GridCell>,
    pub corpus_size: usize,
    pub policies: Vec<PolicyKind>,
    pub aggregation: AggregationMode,
    pub enumeration_budget: u64,
}

/// The frame-interaction regime: every frame salient, high temporal
/// redundancy, two classes at high classifier temperature. Calibrated so the
/// brute-force optimum visibly beats the per-frame surrogate, which in turn
/// beats uniform spacing.
pub fn interaction_generator() -> GeneratorConfig {
    GeneratorConfig {
        num_frames: 10,
        feature_dim: 16,
        num_classes: 2,
        smoothness: 0.98,
        salient_fraction: 1.0,
        noise_scale: 0.05,
        signal_gain: 2.0,
        prototype_seed: 1000,
        seed: 0,
    }
}

pub fn interaction_classifier() -> ClassifierConfig {
    ClassifierConfig {
        kind: ClassifierKind::RedundancyPenalized,
        interaction_strength: 0.5,
        temperature: 4.0,
        kernel_sigma: 1.4,
    }
}

impl Default for PolicyGridConfig {
    fn default() -> Self {
        Self {
            generator: interaction_generator(),
            classifier: interaction_classifier(),
            cells: vec![GridCell { n: 6, t: 10 }],
            corpus_size: 500,
            policies: vec![
                PolicyKind::Uniform,
                PolicyKind::Random,
                PolicyKind::Optimal,
                PolicyKind::SemiOptimal,
                PolicyKind::All,
            ],
            aggregation: AggregationMode::TrueLabel,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

impl PolicyGridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidConfig("policy grid has no cells".into()));
        }
        for cell in &self.cells {
            if cell.n == 0 || cell.n > cell.t {
                return Err(Error::InvalidConfig(format!(
                    "grid cell needs 1 <= N <= T, got N={}, T={}",
                    cell.n, cell.t
                )));
            }
        }
        if self.corpus_size == 0 {
            return Err(Error::InvalidConfig("corpus size must be >= 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies selected".into()));
        }
        self.classifier.validate()?;
        let mut probe = self.generator.clone();
        probe.num_frames = self.cells[0].t;
        probe.validate().map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RedundancyStudyConfig {
    pub generator: GeneratorConfig,
    pub rho_grid: Vec<f64>,
    pub videos_per_cell: usize,
}

impl Default for RedundancyStudyConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig::default(),
            rho_grid: vec![0.0, 0.5, 0.9, 0.99],
            videos_per_cell: 200,
        }
    }
}

impl RedundancyStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho_grid.is_empty() {
            return Err(Error::InvalidConfig("empty rho grid".into()));
        }
        for rho in &self.rho_grid {
            if !(0.0..1.0).contains(rho) {
                return Err(Error::InvalidConfig(format!(
                    "rho must lie in [0, 1), got {rho}"
                )));
            }
        }
        if self.videos_per_cell == 0 {
            return Err(Error::InvalidConfig("videos_per_cell must be >= 1".into()));
        }
        self.generator
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerExperimentConfig {
    pub generator: GeneratorConfig,
    pub classifier: ClassifierConfig,
    pub train_size: usize,
    pub heldout_size: usize,
    /// Frames selected at evaluation time.
    pub n: usize,
    pub hidden_dim: usize,
    /// Seed of the fixed random projection that degrades the sampler's view.
    pub projection_seed: u64,
    pub train: TrainConfig,
    /// Also run the 2x2x2 loss ablation.
    pub ablation: bool,
    /// Also train at lambda in {0, 0.5, 0.99, 1}.
    pub lambda_sweep: bool,
}

impl Default for SamplerExperimentConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig {
                num_frames: 10,
                feature_dim: 8,
                num_classes: 2,
                smoothness: 0.9,
                salient_fraction: 0.6,
                ..GeneratorConfig::default()
            },
            classifier: ClassifierConfig::default(),
            train_size: 200,
            heldout_size: 100,
            n: 6,
            hidden_dim: 64,
            projection_seed: 22,
            train: TrainConfig {
                epochs: 60,
                batch_size: 8,
                ..TrainConfig::default()
            },
            ablation: false,
            lambda_sweep: false,
        }
    }
}

impl SamplerExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_size == 0 || self.heldout_size == 0 {
            return Err(Error::InvalidConfig(
                "train and held-out corpus sizes must be >= 1".into(),
            ));
        }
        if self.n == 0 || self.n > self.generator.num_frames {
            return Err(Error::InvalidConfig(format!(
                "sampler N must satisfy 1 <= N <= T, got N={}, T={}",
                self.n, self.generator.num_frames
            )));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden dim must be >= 1".into()));
        }
        self.classifier.validate()?;
        self.generator
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Top-level experiment document; each subcommand reads its own section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Master seed; per-cell and per-video seeds derive from it.
    pub seed: u64,
    pub policy_grid: PolicyGridConfig,
    pub redundancy: RedundancyStudyConfig,
    pub sampler: SamplerExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Named presets. `grid-small` is the (6,10) comparison; `paper-grid`
    /// adds the large (N, T) cells where brute force must bow out;
    /// `interaction-regime` is the calibrated frame-interaction setting.
    pub fn preset(name: &str) -> Option<Self> {
        let mut config = ExperimentConfig::default();
        match name {
            "default" | "interaction-regime" => {}
            "grid-small" => {
                config.policy_grid.cells = vec![GridCell { n: 6, t: 10 }];
            }
            "paper-grid" => {
                config.policy_grid.cells = vec![
                    GridCell { n: 6, t: 10 },
                    GridCell { n: 8, t: 30 },
                    GridCell { n: 16, t: 60 },
                    GridCell { n: 32, t: 100 },
                ];
                // The (8,30) cell brute-forces 5.85M subsets per video, so
                // a small corpus keeps the preset interactive.
                config.policy_grid.corpus_size = 20;
            }
            _ => return None,
        }
        Some(config)
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["default", "grid-small", "paper-grid", "interaction-regime"]
    }

    pub fn validate(&self) -> Result<()> {
        self.policy_grid.validate()?;
        self.redundancy.validate()?;
        self.sampler.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn presets_exist_and_validate() {
        for name in ExperimentConfig::preset_names() {
            let config = ExperimentConfig::preset(name).expect(name);
            config.validate().unwrap();
        }
        assert!(ExperimentConfig::preset("no-such-preset").is_none());
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = ExperimentConfig::preset("paper-grid").unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let config = ExperimentConfig::from_json(r#"{"seed": 9}"#).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.policy_grid, PolicyGridConfig::default());
    }

    #[test]
    fn invalid_cells_are_rejected() {
        let mut config = ExperimentConfig::default();
        config.policy_grid.cells = vec![GridCell { n: 11, t: 10 }];
        assert!(matches!(
            config.validate(),
            Err(Error::InvalidConfig(_))
        ));
        config.policy_grid.cells.clear();
        assert!(config.validate().is_err());
    }

    #[test]
    fn empty_rho_grid_is_an_invalid_config() {
        let mut config = ExperimentConfig::default();
        config.redundancy.rho_grid.clear();
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
    }
}
