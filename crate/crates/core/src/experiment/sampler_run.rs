//! The sampler experiment: train on a generated corpus, compare against the
//! sampling policies on held-out videos, and optionally run the loss
//! ablation and the lambda sweep.

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

use crate::classifier::{generate_corpus, ClassifierSpec, SyntheticVideo};
use crate::error::Result;
use crate::experiment::config::{ExperimentConfig, SamplerExperimentConfig};
use crate::experiment::report::{write_csv, write_json};
use crate::policies::{
    optimal_policy, random_policy, sampling_fidelity, semi_optimal_policy, uniform_policy,
    AggregationMode, PolicyKind, DEFAULT_ENUMERATION_BUDGET,
};
use crate::sampler::{infer, train, InputProjection, SamplerModel, SoLossKind, TrainConfig, TrainInputs};
use crate::seeding::derive_seed;
use crate::select::binomial;
use crate::types::FrameIndexSet;

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub policy: String,
    pub mean_confidence: f64,
    /// Overlap with the per-frame-confidence policy's selection.
    pub mean_fidelity_to_semi: f64,
    /// Overlap with the brute-force optimum, when it fit the budget.
    pub mean_fidelity_to_optimal: Option<f64>,
    pub mean_calls: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub so_loss: String,
    pub aggregation: String,
    pub label_guidance: bool,
    pub lambda: f64,
    pub heldout_confidence: f64,
    pub heldout_fidelity: f64,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub heldout_confidence: f64,
    pub heldout_fidelity: f64,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerReport {
    pub config: ExperimentConfig,
    pub train_corpus_seed: u64,
    pub heldout_corpus_seed: u64,
    pub model_init_seed: u64,
    pub final_heldout_fidelity: f64,
    pub final_heldout_confidence: f64,
    pub comparison: Vec<ComparisonRow>,
    pub ablation: Option<Vec<AblationRow>>,
    pub lambda_sweep: Option<Vec<LambdaRow>>,
}

struct Bench<'a> {
    classifier: &'a ClassifierSpec,
    heldout: &'a [SyntheticVideo],
    n: usize,
    aggregation: AggregationMode,
    seed: u64,
}

impl Bench<'_> {
    /// Reference selections of the per-frame policy on the held-out set.
    fn semi_sets(&self) -> Result<Vec<FrameIndexSet>> {
        self.heldout
            .iter()
            .map(|video| {
                Ok(semi_optimal_policy(self.classifier, video, self.n, self.aggregation)?.selected)
            })
            .collect()
    }

    fn optimal_sets(&self, budget: u64) -> Result<Option<Vec<FrameIndexSet>>> {
        let t = self.heldout[0].num_frames();
        match binomial(t as u64, self.n as u64) {
            Ok(subsets) if subsets <= budget => {}
            _ => return Ok(None),
        }
        let sets = self
            .heldout
            .iter()
            .map(|video| Ok(optimal_policy(self.classifier, video, self.n, budget)?.selected))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(sets))
    }

    fn summarize(
        &self,
        policy: &str,
        selections: &[FrameIndexSet],
        calls_per_video: f64,
        semi: &[FrameIndexSet],
        optimal: Option<&Vec<FrameIndexSet>>,
    ) -> Result<ComparisonRow> {
        let mut confidence = 0.0;
        let mut fid_semi = 0.0;
        let mut fid_opt = 0.0;
        for (i, (video, selected)) in self.heldout.iter().zip(selections).enumerate() {
            confidence += self
                .classifier
                .classify_clip(video, selected)?
                .class_prob(video.label())?;
            fid_semi += sampling_fidelity(selected, &semi[i])?;
            if let Some(opt) = optimal {
                fid_opt += sampling_fidelity(selected, &opt[i])?;
            }
        }
        let count = self.heldout.len() as f64;
        Ok(ComparisonRow {
            policy: policy.to_string(),
            mean_confidence: confidence / count,
            mean_fidelity_to_semi: fid_semi / count,
            mean_fidelity_to_optimal: optimal.map(|_| fid_opt / count),
            mean_calls: calls_per_video,
        })
    }
}

fn train_once(
    sampler_config: &SamplerExperimentConfig,
    train_config: &TrainConfig,
    classifier: &ClassifierSpec,
    projection: &InputProjection,
    train_corpus: &[SyntheticVideo],
    heldout: &[SyntheticVideo],
    model_seed: u64,
) -> Result<crate::sampler::TrainReport> {
    let model = SamplerModel::new(
        projection.output_dim(),
        sampler_config.hidden_dim,
        sampler_config.generator.num_classes,
        model_seed,
    )?;
    train(
        model,
        &TrainInputs {
            classifier,
            projection,
            train_corpus,
            heldout_corpus: heldout,
            eval_n: sampler_config.n,
        },
        train_config,
    )
}

/// Train the sampler, write the training log, checkpoint, and policy
/// comparison; run the ablation and lambda sweep when requested.
pub fn run_sampler_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<SamplerReport> {
    config.sampler.validate()?;
    let sc = &config.sampler;
    let classifier = sc.classifier.build(&sc.generator)?;
    let projection = InputProjection::default_for(sc.generator.feature_dim, sc.projection_seed)?;

    let train_corpus_seed = derive_seed(config.seed, 0xE1);
    let heldout_corpus_seed = derive_seed(config.seed, 0xE2);
    let model_init_seed = derive_seed(config.seed, 0xE4);
    let train_corpus = generate_corpus(&sc.generator, sc.train_size, train_corpus_seed)?;
    let heldout = generate_corpus(&sc.generator, sc.heldout_size, heldout_corpus_seed)?;

    let report = train_once(
        sc,
        &sc.train,
        &classifier,
        &projection,
        &train_corpus,
        &heldout,
        model_init_seed,
    )?;
    write_csv(&out_dir.join("training_log.csv"), &report.log)?;
    if let Some(parent) = out_dir.join("checkpoint.json").parent() {
        std::fs::create_dir_all(parent)?;
    }
    report.model.save(&out_dir.join("checkpoint.json"))?;

    // Policy comparison on the held-out corpus.
    let bench = Bench {
        classifier: &classifier,
        heldout: &heldout,
        n: sc.n,
        aggregation: sc.train.aggregation,
        seed: derive_seed(config.seed, 0xE3),
    };
    let semi = bench.semi_sets()?;
    let optimal = bench.optimal_sets(DEFAULT_ENUMERATION_BUDGET)?;
    let t = sc.generator.num_frames;

    let mut comparison = Vec::new();
    let uniform_sets: Vec<FrameIndexSet> = heldout
        .iter()
        .map(|v| uniform_policy(v.num_frames(), sc.n))
        .collect::<Result<Vec<_>>>()?;
    comparison.push(bench.summarize(
        PolicyKind::Uniform.name(),
        &uniform_sets,
        1.0,
        &semi,
        optimal.as_ref(),
    )?);
    let random_sets: Vec<FrameIndexSet> = heldout
        .iter()
        .enumerate()
        .map(|(i, v)| random_policy(v.num_frames(), sc.n, derive_seed(bench.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    comparison.push(bench.summarize(
        PolicyKind::Random.name(),
        &random_sets,
        1.0,
        &semi,
        optimal.as_ref(),
    )?);
    comparison.push(bench.summarize(
        PolicyKind::SemiOptimal.name(),
        &semi,
        t as f64,
        &semi,
        optimal.as_ref(),
    )?);
    if let Some(opt) = &optimal {
        let calls = binomial(t as u64, sc.n as u64)? as f64;
        comparison.push(bench.summarize(
            PolicyKind::Optimal.name(),
            opt,
            calls,
            &semi,
            optimal.as_ref(),
        )?);
    }
    let sampler_sets: Vec<FrameIndexSet> = heldout
        .iter()
        .map(|v| Ok(infer(&report.model, &projection, v, sc.n, &classifier)?.selected))
        .collect::<Result<Vec<_>>>()?;
    comparison.push(bench.summarize(
        "sampler",
        &sampler_sets,
        1.0,
        &semi,
        optimal.as_ref(),
    )?);
    write_csv(&out_dir.join("comparison.csv"), &comparison)?;

    // 2x2x2 loss ablation: {squared difference, ranking} x {true-label, max}
    // x {with, without} label guidance.
    let ablation = if sc.ablation {
        let mut rows = Vec::new();
        for so in [SoLossKind::Mse, SoLossKind::Ranking] {
            for aggregation in [AggregationMode::TrueLabel, AggregationMode::MaxOverClasses] {
                for label_guidance in [false, true] {
                    let train_config = TrainConfig {
                        so_loss: so,
                        aggregation,
                        lambda: if label_guidance { sc.train.lambda } else { 1.0 },
                        ..sc.train.clone()
                    };
                    let run = train_once(
                        sc,
                        &train_config,
                        &classifier,
                        &projection,
                        &train_corpus,
                        &heldout,
                        model_init_seed,
                    )?;
                    let last = run.log.last().expect("epochs >= 1");
                    rows.push(AblationRow {
                        so_loss: match so {
                            SoLossKind::Mse => "mse".to_string(),
                            SoLossKind::Ranking => "ranking".to_string(),
                            SoLossKind::RankingPrinted => "ranking-printed".to_string(),
                        },
                        aggregation: match aggregation {
                            AggregationMode::TrueLabel => "true-label".to_string(),
                            AggregationMode::MaxOverClasses => "max".to_string(),
                        },
                        label_guidance,
                        lambda: train_config.lambda,
                        heldout_confidence: last.heldout_confidence,
                        heldout_fidelity: last.heldout_fidelity,
                        final_train_loss: last.train_loss,
                    });
                }
            }
        }
        write_csv(&out_dir.join("ablation.csv"), &rows)?;
        Some(rows)
    } else {
        None
    };

    let lambda_sweep = if sc.lambda_sweep {
        let mut rows = Vec::new();
        for lambda in [0.0, 0.5, 0.99, 1.0] {
            let train_config = TrainConfig {
                lambda,
                ..sc.train.clone()
            };
            let run = train_once(
                sc,
                &train_config,
                &classifier,
                &projection,
                &train_corpus,
                &heldout,
                model_init_seed,
            )?;
            let last = run.log.last().expect("epochs >= 1");
            rows.push(LambdaRow {
                lambda,
                heldout_confidence: last.heldout_confidence,
                heldout_fidelity: last.heldout_fidelity,
                final_train_loss: last.train_loss,
            });
        }
        write_csv(&out_dir.join("lambda_sweep.csv"), &rows)?;
        Some(rows)
    } else {
        None
    };

    let last = report.log.last().expect("epochs >= 1");
    let summary = SamplerReport {
        config: config.clone(),
        train_corpus_seed,
        heldout_corpus_seed,
        model_init_seed,
        final_heldout_fidelity: last.heldout_fidelity,
        final_heldout_confidence: last.heldout_confidence,
        comparison,
        ablation,
        lambda_sweep,
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Per-policy summaries keyed by name, for quick lookups in tests.
pub fn comparison_by_policy(report: &SamplerReport) -> BTreeMap<String, ComparisonRow> {
    report
        .comparison
        .iter()
        .map(|row| (row.policy.clone(), row.clone()))
        .collect()
}
