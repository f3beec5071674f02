//! The trainable sampler network: one hidden layer feeding an importance
//! head and a class head, plus the fixed input projection that degrades
//! what the sampler gets to see relative to the classifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::classifier::SyntheticVideo;
use crate::error::{Error, Result};
use crate::select::softmax;
use crate::types::{ConfidenceVector, FrameFeatures, ImportanceVector};

/// The six parameter tensors, stored flat. Gradients and optimizer velocity
/// reuse the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSet {
    /// input_dim x hidden_dim, row-major.
    pub w_f: Vec<f64>,
    pub b_f: Vec<f64>,
    /// hidden_dim.
    pub w_s: Vec<f64>,
    /// length 1; kept as a vector so all tensors share one treatment.
    pub b_s: Vec<f64>,
    /// hidden_dim x num_classes, row-major.
    pub w_c: Vec<f64>,
    pub b_c: Vec<f64>,
}

pub(crate) const TENSOR_NAMES: [&str; 6] = ["w_f", "b_f", "w_s", "b_s", "w_c", "b_c"];

impl TensorSet {
    pub fn zeros(input_dim: usize, hidden_dim: usize, num_classes: usize) -> Self {
        Self {
            w_f: vec![0.0; input_dim * hidden_dim],
            b_f: vec![0.0; hidden_dim],
            w_s: vec![0.0; hidden_dim],
            b_s: vec![0.0; 1],
            w_c: vec![0.0; hidden_dim * num_classes],
            b_c: vec![0.0; num_classes],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 6] {
        [&self.w_f, &self.b_f, &self.w_s, &self.b_s, &self.w_c, &self.b_c]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w_f,
            &mut self.b_f,
            &mut self.w_s,
            &mut self.b_s,
            &mut self.w_c,
            &mut self.b_c,
        ]
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// self += scale * other, tensor by tensor.
    pub fn add_scaled(&mut self, other: &TensorSet, scale: f64) {
        for (mine, theirs) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += scale * t;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for tensor in self.tensors_mut() {
            for v in tensor.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Frame importance sampler: rectifier feature head, linear importance head,
/// linear class head.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerModel {
    input_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    seed: u64,
    pub params: TensorSet,
}

/// Everything the forward pass produces, with the intermediates the backward
/// pass needs.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// T x hidden, pre-activation.
    pub hidden_pre: Vec<Vec<f64>>,
    /// T x hidden, after the rectifier.
    pub hidden: Vec<Vec<f64>>,
    /// Raw importance head outputs, one per frame.
    pub importance_scores: Vec<f64>,
    /// Softmax of the raw scores over the T frames.
    pub importance: ImportanceVector,
    /// T x C per-frame class logits.
    pub frame_logits: Vec<Vec<f64>>,
    /// Mean frame logits (the video-level logits).
    pub video_logits: Vec<f64>,
    /// Softmax of the video-level logits.
    pub video_prediction: ConfidenceVector,
}

impl SamplerModel {
    /// Glorot-uniform weights, zero biases, deterministic per seed.
    pub fn new(input_dim: usize, hidden_dim: usize, num_classes: usize, seed: u64) -> Result<Self> {
        if input_dim < 1 || hidden_dim < 1 || num_classes < 1 {
            return Err(Error::invalid("model dimensions must all be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = TensorSet::zeros(input_dim, hidden_dim, num_classes);
        let mut init = |tensor: &mut Vec<f64>, fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in tensor.iter_mut() {
                *v = rng.gen_range(-limit..limit);
            }
        };
        init(&mut params.w_f, input_dim, hidden_dim);
        init(&mut params.w_s, hidden_dim, 1);
        init(&mut params.w_c, hidden_dim, num_classes);
        Ok(Self {
            input_dim,
            hidden_dim,
            num_classes,
            seed,
            params,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn zero_gradients(&self) -> TensorSet {
        TensorSet::zeros(self.input_dim, self.hidden_dim, self.num_classes)
    }

    /// Run the network over T frames.
    pub fn forward(&self, frames: &[FrameFeatures]) -> Result<ForwardPass> {
        if frames.is_empty() {
            return Err(Error::invalid("forward needs at least one frame"));
        }
        if frames.iter().any(|f| f.dim() != self.input_dim) {
            return Err(Error::invalid(format!(
                "frame dimension does not match model input dimension {}",
                self.input_dim
            )));
        }
        let t = frames.len();
        let h = self.hidden_dim;
        let c = self.num_classes;
        let mut hidden_pre = Vec::with_capacity(t);
        let mut hidden = Vec::with_capacity(t);
        let mut importance_scores = Vec::with_capacity(t);
        let mut frame_logits = Vec::with_capacity(t);
        let mut video_logits = vec![0.0; c];

        for frame in frames {
            let x = frame.values();
            let mut pre = self.params.b_f.clone();
            for (i, xi) in x.iter().enumerate() {
                let row = &self.params.w_f[i * h..(i + 1) * h];
                for (p, w) in pre.iter_mut().zip(row) {
                    *p += xi * w;
                }
            }
            let act: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();

            let score = self.params.b_s[0]
                + act
                    .iter()
                    .zip(&self.params.w_s)
                    .map(|(z, w)| z * w)
                    .sum::<f64>();

            let mut logits = self.params.b_c.clone();
            for (j, zj) in act.iter().enumerate() {
                let row = &self.params.w_c[j * c..(j + 1) * c];
                for (l, w) in logits.iter_mut().zip(row) {
                    *l += zj * w;
                }
            }
            for (v, l) in video_logits.iter_mut().zip(&logits) {
                *v += l / t as f64;
            }

            hidden_pre.push(pre);
            hidden.push(act);
            importance_scores.push(score);
            frame_logits.push(logits);
        }

        let importance = softmax(&importance_scores, 1.0)?;
        let video_prediction =
            ConfidenceVector::new(softmax(&video_logits, 1.0)?.scores().to_vec())?;
        Ok(ForwardPass {
            hidden_pre,
            hidden,
            importance_scores,
            importance,
            frame_logits,
            video_logits,
            video_prediction,
        })
    }

    /// Backpropagate per-frame score gradients and per-frame logit gradients
    /// into `grads`. The rectifier kink at exactly zero takes the zero
    /// branch.
    pub fn accumulate_gradients(
        &self,
        frames: &[FrameFeatures],
        pass: &ForwardPass,
        score_grads: &[f64],
        logit_grads: &[Vec<f64>],
        grads: &mut TensorSet,
    ) {
        let h = self.hidden_dim;
        let c = self.num_classes;
        for (t, frame) in frames.iter().enumerate() {
            let x = frame.values();
            let z = &pass.hidden[t];
            let pre = &pass.hidden_pre[t];
            let ds = score_grads[t];
            let dl = &logit_grads[t];

            grads.b_s[0] += ds;
            let mut dz = vec![0.0; h];
            for j in 0..h {
                grads.w_s[j] += ds * z[j];
                dz[j] = ds * self.params.w_s[j];
                let row = &self.params.w_c[j * c..(j + 1) * c];
                let grad_row = &mut grads.w_c[j * c..(j + 1) * c];
                for k in 0..c {
                    grad_row[k] += z[j] * dl[k];
                    dz[j] += row[k] * dl[k];
                }
            }
            for (g, d) in grads.b_c.iter_mut().zip(dl) {
                *g += d;
            }
            for j in 0..h {
                if pre[j] > 0.0 {
                    grads.b_f[j] += dz[j];
                    for (i, xi) in x.iter().enumerate() {
                        grads.w_f[i * h + j] += xi * dz[j];
                    }
                }
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = CheckpointDoc::from(self);
        let value = serde_json::to_value(&doc)?;
        std::fs::write(path, serde_json::to_string_pretty(&value)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: CheckpointDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TensorDoc {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Checkpoint document: dimensions, init seed, and one flat array per tensor.
#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "D_h")]
    d_h: usize,
    #[serde(rename = "C")]
    c: usize,
    seed: u64,
    parameters: BTreeMap<String, TensorDoc>,
}

impl From<&SamplerModel> for CheckpointDoc {
    fn from(m: &SamplerModel) -> Self {
        let shapes: [Vec<usize>; 6] = [
            vec![m.input_dim, m.hidden_dim],
            vec![m.hidden_dim],
            vec![m.hidden_dim],
            vec![1],
            vec![m.hidden_dim, m.num_classes],
            vec![m.num_classes],
        ];
        let mut parameters = BTreeMap::new();
        for ((name, tensor), shape) in TENSOR_NAMES.iter().zip(m.params.tensors()).zip(shapes) {
            parameters.insert(
                name.to_string(),
                TensorDoc {
                    shape,
                    data: tensor.clone(),
                },
            );
        }
        CheckpointDoc {
            d: m.input_dim,
            d_h: m.hidden_dim,
            c: m.num_classes,
            seed: m.seed,
            parameters,
        }
    }
}

impl TryFrom<CheckpointDoc> for SamplerModel {
    type Error = Error;

    fn try_from(doc: CheckpointDoc) -> Result<Self> {
        let mut model = SamplerModel::new(doc.d, doc.d_h, doc.c, doc.seed)?;
        let expected: [(usize, Vec<usize>); 6] = [
            (doc.d * doc.d_h, vec![doc.d, doc.d_h]),
            (doc.d_h, vec![doc.d_h]),
            (doc.d_h, vec![doc.d_h]),
            (1, vec![1]),
            (doc.d_h * doc.c, vec![doc.d_h, doc.c]),
            (doc.c, vec![doc.c]),
        ];
        for ((name, target), (len, shape)) in TENSOR_NAMES
            .iter()
            .zip(model.params.tensors_mut())
            .zip(expected)
        {
            let tensor = doc
                .parameters
                .get(*name)
                .ok_or_else(|| Error::invalid(format!("checkpoint missing tensor {name}")))?;
            if tensor.shape != shape || tensor.data.len() != len {
                return Err(Error::invalid(format!(
                    "checkpoint tensor {name} has shape {:?}, expected {:?}",
                    tensor.shape, shape
                )));
            }
            target.copy_from_slice(&tensor.data);
        }
        Ok(model)
    }
}

/// Fixed random projection plus per-frame noise: the sampler's degraded view
/// of the video. The classifier keeps the full-resolution features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProjection {
    input_dim: usize,
    output_dim: usize,
    noise_scale: f64,
    seed: u64,
    matrix: Vec<f64>,
}

impl InputProjection {
    pub fn new(input_dim: usize, output_dim: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        if input_dim < 1 || output_dim < 1 {
            return Err(Error::invalid("projection dimensions must be >= 1"));
        }
        if !(noise_scale >= 0.0) {
            return Err(Error::invalid("projection noise must be >= 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix: Vec<f64> = (0..output_dim * input_dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        if output_dim <= input_dim {
            // Orthonormalize the rows (Gram-Schmidt) so the view never
            // collapses two directions onto one; plain Gaussian rows are
            // occasionally badly conditioned.
            for r in 0..output_dim {
                for prev in 0..r {
                    let dot: f64 = (0..input_dim)
                        .map(|i| matrix[r * input_dim + i] * matrix[prev * input_dim + i])
                        .sum();
                    for i in 0..input_dim {
                        let v = matrix[prev * input_dim + i];
                        matrix[r * input_dim + i] -= dot * v;
                    }
                }
                let norm: f64 = matrix[r * input_dim..(r + 1) * input_dim]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                for i in 0..input_dim {
                    matrix[r * input_dim + i] /= norm;
                }
            }
        } else {
            let scale = 1.0 / (input_dim as f64).sqrt();
            for v in matrix.iter_mut() {
                *v *= scale;
            }
        }
        Ok(Self {
            input_dim,
            output_dim,
            noise_scale,
            seed,
            matrix,
        })
    }

    /// Down-sampled default: half the feature dimension, noise 0.1.
    pub fn default_for(input_dim: usize, seed: u64) -> Result<Self> {
        Self::new(input_dim, (input_dim / 2).max(1), 0.1, seed)
    }

    /// Noise-free pass-through; the sampler sees exactly what the
    /// classifier sees.
    pub fn identity(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::invalid("projection dimensions must be >= 1"));
        }
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        Ok(Self {
            input_dim: dim,
            output_dim: dim,
            noise_scale: 0.0,
            seed: 0,
            matrix,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Noiseless projection of every frame.
    pub fn project_clean(&self, video: &SyntheticVideo) -> Result<Vec<FrameFeatures>> {
        if video.feature_dim() != self.input_dim {
            return Err(Error::invalid(format!(
                "video dimension {} does not match projection input {}",
                video.feature_dim(),
                self.input_dim
            )));
        }
        video
            .frames()
            .iter()
            .map(|frame| {
                let x = frame.values();
                let values = (0..self.output_dim)
                    .map(|o| {
                        let row = &self.matrix[o * self.input_dim..(o + 1) * self.input_dim];
                        row.iter().zip(x).map(|(w, v)| w * v).sum()
                    })
                    .collect();
                FrameFeatures::new(values)
            })
            .collect()
    }

    /// Add view noise to a clean projection. The noise is a pure function of
    /// (projection seed, video seed, stream); training redraws it per epoch
    /// by varying the stream, inference always uses stream 0.
    pub fn noisy_view(
        &self,
        clean: &[FrameFeatures],
        video_seed: u64,
        stream: u64,
    ) -> Result<Vec<FrameFeatures>> {
        if self.noise_scale == 0.0 {
            return Ok(clean.to_vec());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seeding::derive_seed2(
            self.seed, video_seed, stream,
        ));
        clean
            .iter()
            .map(|frame| {
                let values = frame
                    .values()
                    .iter()
                    .map(|v| v + self.noise_scale * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                FrameFeatures::new(values)
            })
            .collect()
    }

    /// The canonical degraded view: clean projection plus the stream-0 noise
    /// draw. Same video, same view, always.
    pub fn project(&self, video: &SyntheticVideo) -> Result<Vec<FrameFeatures>> {
        let clean = self.project_clean(video)?;
        self.noisy_view(&clean, video.seed(), 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{generate_video, GeneratorConfig};
    use approx::assert_relative_eq;

    fn feats(v: &[f64]) -> FrameFeatures {
        FrameFeatures::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_frames_get_uniform_importance() {
        let model = SamplerModel::new(4, 8, 3, 1).unwrap();
        let frame = feats(&[0.2, -0.4, 1.0, 0.3]);
        let pass = model.forward(&vec![frame; 5]).unwrap();
        for p in pass.importance.scores() {
            assert_relative_eq!(*p, 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_frame_has_importance_one() {
        let model = SamplerModel::new(3, 4, 2, 2).unwrap();
        let pass = model.forward(&[feats(&[1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(pass.importance.scores(), &[1.0]);
    }

    #[test]
    fn importance_and_prediction_are_normalized() {
        let model = SamplerModel::new(5, 7, 4, 3).unwrap();
        let frames: Vec<_> = (0..6)
            .map(|i| feats(&[i as f64, 1.0, -0.5, 0.25 * i as f64, 2.0]))
            .collect();
        let pass = model.forward(&frames).unwrap();
        let sum_imp: f64 = pass.importance.scores().iter().sum();
        assert!((sum_imp - 1.0).abs() < 1e-9);
        let sum_pred: f64 = pass.video_prediction.probs().iter().sum();
        assert!((sum_pred - 1.0).abs() < 1e-9);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let model = SamplerModel::new(4, 8, 3, 1).unwrap();
        assert!(model.forward(&[feats(&[1.0, 2.0])]).is_err());
        assert!(model.forward(&[]).is_err());
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = SamplerModel::new(6, 12, 5, 42).unwrap();
        let b = SamplerModel::new(6, 12, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = SamplerModel::new(6, 12, 5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let model = SamplerModel::new(8, 16, 6, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let back = SamplerModel::load(&path).unwrap();
        assert_eq!(model, back);
        for (a, b) in model.params.tensors().iter().zip(back.params.tensors()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn checkpoint_rejects_shape_mismatch() {
        let model = SamplerModel::new(4, 8, 3, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let mut doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        doc["parameters"]["w_s"]["shape"] = serde_json::json!([9]);
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(SamplerModel::load(&path).is_err());
    }

    #[test]
    fn projection_is_deterministic_per_video() {
        let cfg = GeneratorConfig {
            seed: 9,
            ..GeneratorConfig::default()
        };
        let video = generate_video(&cfg).unwrap();
        let proj = InputProjection::default_for(cfg.feature_dim, 55).unwrap();
        let a = proj.project(&video).unwrap();
        let b = proj.project(&video).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].dim(), cfg.feature_dim / 2);
    }
}
