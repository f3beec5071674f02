// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN, which must never pass a range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Frame sampling laboratory: synthetic videos, frozen classifiers, the
//! brute-force optimal selection policy and its O(T) per-frame surrogate,
//! plus a small trainable sampler distilled from per-frame confidences.

pub mod classifier;
pub mod error;
pub mod experiment;
pub mod policies;
pub mod redundancy;
pub mod sampler;
pub mod seeding;
pub mod select;
pub mod types;

pub use classifier::{
    generate_corpus, generate_video, make_prototypes, ClassifierKind, ClassifierSpec,
    GeneratorConfig, SyntheticVideo,
};
pub use error::{Error, Result};
pub use experiment::{
    run_policy_grid, run_redundancy_study, run_sampler_experiment, ExperimentConfig,
};
pub use policies::{
    evaluate_policies, optimal_policy, random_policy, sampling_fidelity, semi_optimal_policy,
    uniform_policy, AggregationMode, EvaluationOptions, EvaluationReport, PolicyKind,
    PolicyResult, PolicySummary, DEFAULT_ENUMERATION_BUDGET,
};
pub use redundancy::{
    median_bandwidth, redundancy_sweep, relevance, Bandwidth, KernelConfig, SweepConfig,
    SweepTable,
};
pub use sampler::{
    cosine_lr, infer, label_guidance_loss, mse_importance_loss, ranking_loss,
    ranking_loss_printed, teacher_targets, total_loss, train, EpochLog, InputProjection,
    SamplerModel, SoLossKind, TensorSet, TrainConfig, TrainInputs, TrainReport,
};
pub use seeding::{derive_seed, derive_seed2};
pub use select::{binomial, softmax, top_n_indices};
pub use types::{
    ConfidenceMatrix, ConfidenceVector, FrameFeatures, FrameIndexSet, ImportanceVector,
};
