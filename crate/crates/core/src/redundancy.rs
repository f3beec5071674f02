//! Gaussian relevance kernel between frame embeddings and the redundancy
//! sweep that measures how temporal smoothness inflates it.
//!
//! The unnormalized kernel value lives in (0, 1] and equals 1 only for
//! identical embeddings, which makes it directly comparable across
//! configurations; the normalized variant divides by the Gaussian
//! normalizer `sqrt((2*pi)^D * |Sigma|)` and is reported in metadata only.

use serde::{Deserialize, Serialize};

use crate::classifier::{generate_video, GeneratorConfig, SyntheticVideo};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::types::FrameFeatures;

/// Kernel bandwidth: one sigma for every dimension or one per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Scalar(f64),
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
    /// Divide by the Gaussian normalizer instead of reporting the bare
    /// exponential factor.
    pub normalize: bool,
}

impl KernelConfig {
    pub fn scalar(sigma: f64) -> Self {
        Self {
            bandwidth: Bandwidth::Scalar(sigma),
            normalize: false,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match &self.bandwidth {
            Bandwidth::Scalar(s) => {
                if !(*s > 0.0) || !s.is_finite() {
                    return Err(Error::invalid(format!("bandwidth must be > 0, got {s}")));
                }
            }
            Bandwidth::Diagonal(sigmas) => {
                if sigmas.len() != dim {
                    return Err(Error::invalid(format!(
                        "diagonal bandwidth has {} entries for dimension {dim}",
                        sigmas.len()
                    )));
                }
                if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                    return Err(Error::invalid("bandwidth must be > 0 in every dimension"));
                }
            }
        }
        Ok(())
    }

    /// 1 / sqrt((2*pi)^D * |Sigma|), with Sigma = diag(sigma^2).
    pub fn normalizer(&self, dim: usize) -> Result<f64> {
        self.validate(dim)?;
        let log_det = match &self.bandwidth {
            Bandwidth::Scalar(s) => 2.0 * dim as f64 * s.ln(),
            Bandwidth::Diagonal(sigmas) => 2.0 * sigmas.iter().map(|s| s.ln()).sum::<f64>(),
        };
        let log_z = -0.5 * (dim as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(log_z.exp())
    }
}

/// Gaussian similarity between two frame embeddings:
/// `exp(-1/2 * (x_i - x_j)^T Sigma^-1 (x_i - x_j))`, times the normalizer
/// when `config.normalize` is set.
pub fn relevance(x_i: &FrameFeatures, x_j: &FrameFeatures, config: &KernelConfig) -> Result<f64> {
    if x_i.dim() != x_j.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            x_i.dim(),
            x_j.dim()
        )));
    }
    config.validate(x_i.dim())?;
    let quad = match &config.bandwidth {
        Bandwidth::Scalar(s) => x_i.squared_distance(x_j)? / (s * s),
        Bandwidth::Diagonal(sigmas) => x_i
            .values()
            .iter()
            .zip(x_j.values())
            .zip(sigmas)
            .map(|((a, b), s)| {
                let d = a - b;
                d * d / (s * s)
            })
            .sum(),
    };
    let value = (-0.5 * quad).exp();
    if config.normalize {
        Ok(value * config.normalizer(x_i.dim())?)
    } else {
        Ok(value)
    }
}

/// Median-heuristic bandwidth fitted on a corpus of embedding pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBandwidth {
    pub config: KernelConfig,
    /// Set when every pairwise distance was zero and the unit fallback
    /// was used instead.
    pub degenerate_fallback: bool,
}

/// sigma = median pairwise distance / sqrt(2). All-zero distances fall back
/// to sigma = 1 with the fallback flag set.
pub fn median_bandwidth(pairs: &[(FrameFeatures, FrameFeatures)]) -> Result<FittedBandwidth> {
    if pairs.is_empty() {
        return Err(Error::invalid("median bandwidth needs at least one pair"));
    }
    let mut distances = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        distances.push(a.squared_distance(b)?.sqrt());
    }
    distances.sort_by(f64::total_cmp);
    let median = if distances.len() % 2 == 1 {
        distances[distances.len() / 2]
    } else {
        let hi = distances.len() / 2;
        0.5 * (distances[hi - 1] + distances[hi])
    };
    if median == 0.0 {
        return Ok(FittedBandwidth {
            config: KernelConfig::scalar(1.0),
            degenerate_fallback: true,
        });
    }
    Ok(FittedBandwidth {
        config: KernelConfig::scalar(median / std::f64::consts::SQRT_2),
        degenerate_fallback: false,
    })
}

pub const SWEEP_HISTOGRAM_BINS: usize = 20;

/// Settings for the smoothness sweep: a grid of AR(1) coefficients applied
/// to a shared generator template.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Generator template; its `smoothness` field is overridden per cell.
    pub generator: GeneratorConfig,
    pub rho_grid: Vec<f64>,
    pub videos_per_cell: usize,
    pub seed: u64,
}

/// Distribution summary of consecutive-frame relevance at one smoothness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho: f64,
    pub pairs: u64,
    pub mean: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    /// Scalar sigma fitted on the rho = 0 calibration cell and frozen.
    pub bandwidth: f64,
    pub bandwidth_fallback: bool,
    /// Gaussian normalizer for the fitted bandwidth, reported for reference.
    pub normalizer: f64,
    pub cells: Vec<SweepCell>,
    /// Raw consecutive-pair relevances per cell, in (cell, video, pair) order.
    #[serde(skip)]
    pub raw: Vec<Vec<f64>>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between closest ranks.
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn consecutive_relevances(video: &SyntheticVideo, config: &KernelConfig) -> Result<Vec<f64>> {
    let frames = video.frames();
    let mut out = Vec::with_capacity(frames.len().saturating_sub(1));
    for pair in frames.windows(2) {
        out.push(relevance(&pair[0], &pair[1], config)?);
    }
    Ok(out)
}

/// Generate a corpus per rho cell and summarize consecutive-frame relevance.
///
/// The bandwidth is fitted once, on a dedicated rho = 0 calibration corpus,
/// and frozen so cells stay comparable.
pub fn redundancy_sweep(config: &SweepConfig) -> Result<SweepTable> {
    if config.rho_grid.is_empty() {
        return Err(Error::InvalidConfig("empty rho grid".into()));
    }
    if config.videos_per_cell == 0 {
        return Err(Error::InvalidConfig("videos_per_cell must be >= 1".into()));
    }
    for rho in &config.rho_grid {
        if !(0.0..1.0).contains(rho) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in [0, 1), got {rho}"
            )));
        }
    }

    let cell_corpus = |rho: f64, stream: u64| -> Result<Vec<SyntheticVideo>> {
        let mut videos = Vec::with_capacity(config.videos_per_cell);
        for i in 0..config.videos_per_cell {
            let mut cell_cfg = config.generator.clone();
            cell_cfg.smoothness = rho;
            cell_cfg.seed = derive_seed(derive_seed(config.seed, stream), i as u64);
            videos.push(generate_video(&cell_cfg)?);
        }
        Ok(videos)
    };

    // Calibration cell: rho = 0, its own seed stream.
    let calibration = cell_corpus(0.0, u64::MAX)?;
    let mut pairs = Vec::new();
    for video in &calibration {
        for w in video.frames().windows(2) {
            pairs.push((w[0].clone(), w[1].clone()));
        }
    }
    let fitted = median_bandwidth(&pairs)?;
    let sigma = match fitted.config.bandwidth {
        Bandwidth::Scalar(s) => s,
        Bandwidth::Diagonal(_) => unreachable!("median heuristic is scalar"),
    };
    let dim = config.generator.feature_dim;
    let normalizer = fitted.config.normalizer(dim)?;

    let mut cells = Vec::with_capacity(config.rho_grid.len());
    let mut raw = Vec::with_capacity(config.rho_grid.len());
    for (cell_idx, &rho) in config.rho_grid.iter().enumerate() {
        let corpus = cell_corpus(rho, cell_idx as u64)?;
        let mut values = Vec::new();
        for video in &corpus {
            values.extend(consecutive_relevances(video, &fitted.config)?);
        }
        let mut histogram = vec![0u64; SWEEP_HISTOGRAM_BINS];
        for v in &values {
            let bin = ((v * SWEEP_HISTOGRAM_BINS as f64) as usize).min(SWEEP_HISTOGRAM_BINS - 1);
            histogram[bin] += 1;
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        cells.push(SweepCell {
            rho,
            pairs: values.len() as u64,
            mean,
            p10: percentile(&sorted, 0.10),
            p50: percentile(&sorted, 0.50),
            p90: percentile(&sorted, 0.90),
            histogram,
        });
        raw.push(values);
    }

    Ok(SweepTable {
        bandwidth: sigma,
        bandwidth_fallback: fitted.degenerate_fallback,
        normalizer,
        cells,
        raw,
    })
}
