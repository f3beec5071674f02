//! Distillation training: the sampler imitates the per-frame-confidence
//! policy via the ranking loss, with a small cross-entropy term pushing the
//! shared features to carry label information.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierSpec, SyntheticVideo};
use crate::error::{Error, Result};
use crate::policies::{AggregationMode, PolicyResult};
use crate::sampler::loss::{label_guidance_loss, so_loss, SoLossKind};
use crate::sampler::model::{ForwardPass, InputProjection, SamplerModel, TensorSet};
use crate::seeding::derive_seed;
use crate::select::{softmax, top_n_of_slice};
use crate::types::{ConfidenceMatrix, FrameFeatures, FrameIndexSet};

/// Optimizer and loss settings. The optimizer follows the reference recipe:
/// SGD with momentum 0.9, weight decay 1e-4, base learning rate 1e-3,
/// lambda 0.99, cosine annealing without warm-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Mixing weight: lambda * importance loss + (1 - lambda) * label loss.
    pub lambda: f64,
    /// Ranking margin.
    pub gamma: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// How teacher confidences collapse to one score per frame.
    pub aggregation: AggregationMode,
    pub so_loss: SoLossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            momentum: 0.9,
            weight_decay: 1e-4,
            lambda: 0.99,
            gamma: 0.05,
            epochs: 30,
            batch_size: 16,
            seed: 0,
            aggregation: AggregationMode::MaxOverClasses,
            so_loss: SoLossKind::Ranking,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid("lambda must lie in [0, 1]"));
        }
        if !(self.momentum >= 0.0) || !(self.weight_decay >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::invalid(
                "momentum, weight decay, and gamma must be >= 0",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        Ok(())
    }
}

/// Per-frame teacher scores softmaxed into the target importance
/// distribution.
pub fn teacher_targets(
    teacher: &ConfidenceMatrix,
    label: usize,
    aggregation: AggregationMode,
) -> Result<Vec<f64>> {
    let scores = teacher
        .rows()
        .iter()
        .map(|row| aggregation.frame_score(row, label))
        .collect::<Result<Vec<_>>>()?;
    Ok(softmax(&scores, 1.0)?.scores().to_vec())
}

/// Loss breakdown and full parameter gradient for one video.
#[derive(Debug, Clone)]
pub struct TotalLoss {
    pub loss: f64,
    pub importance_loss: f64,
    pub label_loss: f64,
    pub grads: TensorSet,
    pub pass: ForwardPass,
}

/// lambda * L_importance + (1 - lambda) * L_label, with gradients
/// backpropagated through both heads and the shared feature layer.
pub fn total_loss(
    model: &SamplerModel,
    frames: &[FrameFeatures],
    teacher: &ConfidenceMatrix,
    label: usize,
    config: &TrainConfig,
) -> Result<TotalLoss> {
    config.validate()?;
    if teacher.num_frames() != frames.len() {
        return Err(Error::invalid(format!(
            "teacher has {} rows for {} frames",
            teacher.num_frames(),
            frames.len()
        )));
    }
    if label >= model.num_classes() {
        return Err(Error::invalid(format!(
            "label {label} out of range for {} classes",
            model.num_classes()
        )));
    }
    let pass = model.forward(frames)?;
    let targets = teacher_targets(teacher, label, config.aggregation)?;
    let importance = so_loss(
        config.so_loss,
        &targets,
        &pass.importance_scores,
        config.gamma,
    )?;
    let (label_loss, label_grads) = label_guidance_loss(&pass.video_logits, label)?;

    let t = frames.len() as f64;
    let lambda = config.lambda;
    let score_grads: Vec<f64> = importance
        .score_grads
        .iter()
        .map(|g| lambda * g)
        .collect();
    // Each frame's logits enter the video logits with weight 1/T.
    let per_frame_logit_grads: Vec<f64> = label_grads
        .iter()
        .map(|g| (1.0 - lambda) * g / t)
        .collect();
    let logit_grads: Vec<Vec<f64>> = (0..frames.len())
        .map(|_| per_frame_logit_grads.clone())
        .collect();

    let mut grads = model.zero_gradients();
    model.accumulate_gradients(frames, &pass, &score_grads, &logit_grads, &mut grads);
    Ok(TotalLoss {
        loss: lambda * importance.loss + (1.0 - lambda) * label_loss,
        importance_loss: importance.loss,
        label_loss,
        grads,
        pass,
    })
}

/// Cosine annealing from `base` at epoch 0 to 0 at the final epoch, no
/// warm-up.
pub fn cosine_lr(base: f64, epoch: usize, total_epochs: usize) -> f64 {
    if total_epochs <= 1 {
        return base;
    }
    let progress = epoch as f64 / (total_epochs - 1) as f64;
    0.5 * base * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// SGD with velocity and decoupled weight decay (a parameter shrink applied
/// after the gradient step, not mixed into the gradient).
#[derive(Debug, Clone)]
pub struct MomentumSgd {
    velocity: TensorSet,
    momentum: f64,
    weight_decay: f64,
}

impl MomentumSgd {
    pub fn new(model: &SamplerModel, momentum: f64, weight_decay: f64) -> Self {
        Self {
            velocity: model.zero_gradients(),
            momentum,
            weight_decay,
        }
    }

    pub fn step(&mut self, params: &mut TensorSet, grads: &TensorSet, lr: f64) {
        self.velocity.scale(self.momentum);
        self.velocity.add_scaled(grads, 1.0);
        params.add_scaled(&self.velocity, -lr);
        if self.weight_decay > 0.0 {
            params.scale(1.0 - lr * self.weight_decay);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub heldout_fidelity: f64,
    pub heldout_confidence: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: SamplerModel,
    pub log: Vec<EpochLog>,
}

/// Everything a training run needs besides the model and config.
pub struct TrainInputs<'a> {
    pub classifier: &'a ClassifierSpec,
    pub projection: &'a InputProjection,
    pub train_corpus: &'a [SyntheticVideo],
    pub heldout_corpus: &'a [SyntheticVideo],
    /// N used for the held-out fidelity and confidence columns.
    pub eval_n: usize,
}

struct PreparedVideo {
    clean: Vec<FrameFeatures>,
    teacher: ConfidenceMatrix,
    label: usize,
    video_seed: u64,
}

struct PreparedHeldout<'a> {
    video: &'a SyntheticVideo,
    frames: Vec<FrameFeatures>,
    /// Reference selection of the per-frame-confidence policy.
    reference: FrameIndexSet,
}

/// Train with per-epoch cosine learning rate and seeded shuffling. Returns
/// the final-epoch model (no early stopping) and one log row per epoch.
pub fn train(
    model: SamplerModel,
    inputs: &TrainInputs<'_>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if inputs.train_corpus.is_empty() {
        return Err(Error::invalid("training corpus must be non-empty"));
    }
    let mut model = model;
    if config.epochs == 0 {
        return Ok(TrainReport {
            model,
            log: Vec::new(),
        });
    }

    let prepared: Vec<PreparedVideo> = inputs
        .train_corpus
        .iter()
        .map(|video| {
            Ok(PreparedVideo {
                clean: inputs.projection.project_clean(video)?,
                teacher: inputs.classifier.classify_all_frames(video)?,
                label: video.label(),
                video_seed: video.seed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let heldout: Vec<PreparedHeldout<'_>> = inputs
        .heldout_corpus
        .iter()
        .map(|video| {
            let teacher = inputs.classifier.classify_all_frames(video)?;
            let scores = teacher
                .rows()
                .iter()
                .map(|row| config.aggregation.frame_score(row, video.label()))
                .collect::<Result<Vec<_>>>()?;
            Ok(PreparedHeldout {
                video,
                frames: inputs.projection.project(video)?,
                reference: top_n_of_slice(&scores, inputs.eval_n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut optimizer = MomentumSgd::new(&model, config.momentum, config.weight_decay);
    let mut log = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..prepared.len()).collect();

    for epoch in 0..config.epochs {
        let lr = cosine_lr(config.learning_rate, epoch, config.epochs);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, epoch as u64));
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = model.zero_gradients();
            let mut batch_loss = 0.0;
            for &vi in batch {
                let video = &prepared[vi];
                // Fresh view noise each epoch (stream 0 is reserved for the
                // canonical inference view), so the student cannot memorize
                // one noise draw per video.
                let frames =
                    inputs
                        .projection
                        .noisy_view(&video.clean, video.video_seed, 1 + epoch as u64)?;
                let out = total_loss(&model, &frames, &video.teacher, video.label, config)?;
                batch_loss += out.loss;
                grads.add_scaled(&out.grads, 1.0);
            }
            if !batch_loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    batch: batch_idx,
                    learning_rate: lr,
                });
            }
            grads.scale(1.0 / batch.len() as f64);
            optimizer.step(&mut model.params, &grads, lr);
            if !model.params.all_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    batch: batch_idx,
                    learning_rate: lr,
                });
            }
            epoch_loss += batch_loss;
        }

        let (heldout_fidelity, heldout_confidence) =
            evaluate_heldout(&model, inputs.classifier, &heldout, inputs.eval_n)?;
        log.push(EpochLog {
            epoch,
            lr,
            train_loss: epoch_loss / prepared.len() as f64,
            heldout_fidelity,
            heldout_confidence,
        });
    }

    Ok(TrainReport { model, log })
}

fn evaluate_heldout(
    model: &SamplerModel,
    classifier: &ClassifierSpec,
    heldout: &[PreparedHeldout<'_>],
    n: usize,
) -> Result<(f64, f64)> {
    if heldout.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut fidelity = 0.0;
    let mut confidence = 0.0;
    for item in heldout {
        let pass = model.forward(&item.frames)?;
        let selected = top_n_of_slice(&pass.importance_scores, n)?;
        fidelity += selected.intersection_size(&item.reference) as f64 / n as f64;
        confidence += classifier
            .classify_clip(item.video, &selected)?
            .class_prob(item.video.label())?;
    }
    let count = heldout.len() as f64;
    Ok((fidelity / count, confidence / count))
}

/// Select N frames with the trained sampler and score the clip. The sampler
/// itself costs no classifier calls; only the final clip evaluation does.
pub fn infer(
    model: &SamplerModel,
    projection: &InputProjection,
    video: &SyntheticVideo,
    n: usize,
    classifier: &ClassifierSpec,
) -> Result<PolicyResult> {
    let frames = projection.project(video)?;
    let pass = model.forward(&frames)?;
    let selected = top_n_of_slice(&pass.importance_scores, n)?;
    let clip_confidence = classifier
        .classify_clip(video, &selected)?
        .class_prob(video.label())?;
    Ok(PolicyResult {
        policy_name: "sampler".to_string(),
        selected,
        clip_confidence,
        classifier_calls: 1,
    })
}
