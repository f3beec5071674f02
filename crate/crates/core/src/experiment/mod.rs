//! Experiment harness: configuration, runners, and report emission for the
//! policy grid, the redundancy study, and the sampler training experiment.

mod config;
mod grid;
mod redundancy_study;
mod report;
mod sampler_run;

pub use config::{
    interaction_classifier, interaction_generator, ClassifierConfig, ExperimentConfig, GridCell,
    PolicyGridConfig, RedundancyStudyConfig, SamplerExperimentConfig,
};
pub use grid::{run_policy_grid, GridCellReport, GridReport, SkippedPolicy};
pub use redundancy_study::{run_redundancy_study, RedundancyReport};
pub use report::{write_csv, write_json};
pub use sampler_run::{
    comparison_by_policy, run_sampler_experiment, AblationRow, ComparisonRow, LambdaRow,
    SamplerReport,
};
