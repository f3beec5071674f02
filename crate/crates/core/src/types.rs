//! Core domain types: frame embeddings, confidence vectors, importance
//! scores, and index sets.
//!
//! All constructors validate their invariants and return [`Error::InvalidArgument`]
//! on violation, so a value of one of these types is always well formed.

use serde::Serialize;

use crate::error::{Error, Result};

/// A D-dimensional real vector standing in for a frame's visual embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FrameFeatures {
    values: Vec<f64>,
}

impl FrameFeatures {
    /// Requires at least one coordinate, all finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("frame features must have dimension >= 1"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "frame features must be finite, found {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dot(&self, other: &FrameFeatures) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn squared_distance(&self, other: &FrameFeatures) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Per-class probabilities for one clip or frame. Entries lie in [0, 1] and
/// sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConfidenceVector {
    probs: Vec<f64>,
}

pub(crate) const PROB_SUM_TOLERANCE: f64 = 1e-9;

impl ConfidenceVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("confidence vector must have >= 1 class"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(
                "confidence entries must lie in [0, 1]".to_string(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "confidence entries must sum to 1, got {sum}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Confidence assigned to class `label`.
    pub fn class_prob(&self, label: usize) -> Result<f64> {
        self.probs
            .get(label)
            .copied()
            .ok_or_else(|| Error::invalid(format!("class {label} out of range")))
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Index of the most likely class; ties go to the smaller index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// T per-frame confidence vectors stacked in frame order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConfidenceMatrix {
    rows: Vec<ConfidenceVector>,
}

impl ConfidenceMatrix {
    pub fn new(rows: Vec<ConfidenceVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("confidence matrix must have >= 1 row"));
        }
        let c = rows[0].num_classes();
        if rows.iter().any(|r| r.num_classes() != c) {
            return Err(Error::invalid("confidence matrix rows must share C"));
        }
        Ok(Self { rows })
    }

    pub fn num_frames(&self) -> usize {
        self.rows.len()
    }

    pub fn num_classes(&self) -> usize {
        self.rows[0].num_classes()
    }

    pub fn row(&self, t: usize) -> &ConfidenceVector {
        &self.rows[t]
    }

    pub fn rows(&self) -> &[ConfidenceVector] {
        &self.rows
    }
}

/// Per-frame importance scores. Finite, but not necessarily normalized;
/// [`crate::select::softmax`] produces the normalized variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ImportanceVector {
    scores: Vec<f64>,
}

impl ImportanceVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("importance vector must have >= 1 entry"));
        }
        if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "importance scores must be finite, found {bad}"
            )));
        }
        Ok(Self { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// An ordered set of N distinct frame indices in [0, T). Kept strictly
/// increasing so the classifier always sees frames in temporal order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FrameIndexSet {
    indices: Vec<usize>,
}

impl FrameIndexSet {
    /// Validates strict increase and the [0, frame_count) bound.
    pub fn new(indices: Vec<usize>, frame_count: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("frame index set must be non-empty"));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "frame indices must be strictly increasing".to_string(),
            ));
        }
        let last = *indices.last().expect("non-empty");
        if last >= frame_count {
            return Err(Error::invalid(format!(
                "frame index {last} out of range for {frame_count} frames"
            )));
        }
        Ok(Self { indices })
    }

    /// The full index set 0..frame_count.
    pub fn all(frame_count: usize) -> Result<Self> {
        Self::new((0..frame_count).collect(), frame_count)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// |self ∩ other|. Both sets are sorted, so a linear merge suffices.
    pub fn intersection_size(&self, other: &FrameIndexSet) -> usize {
        let mut count = 0;
        let mut it = other.indices.iter().peekable();
        for &i in &self.indices {
            while let Some(&&j) = it.peek() {
                if j < i {
                    it.next();
                } else {
                    break;
                }
            }
            if it.peek() == Some(&&i) {
                count += 1;
            }
        }
        count
    }

    /// Semicolon-joined indices for CSV cells, e.g. "1;3;5".
    pub fn join_semicolon(&self) -> String {
        self.indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl std::fmt::Display for FrameIndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}}}", self.join_semicolon())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_features_reject_nan() {
        assert!(FrameFeatures::new(vec![0.0, f64::NAN]).is_err());
        assert!(FrameFeatures::new(vec![]).is_err());
        assert!(FrameFeatures::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn confidence_vector_checks_sum() {
        assert!(ConfidenceVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ConfidenceVector::new(vec![0.5, 0.6]).is_err());
        assert!(ConfidenceVector::new(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn index_set_requires_strict_increase() {
        assert!(FrameIndexSet::new(vec![0, 1, 1], 5).is_err());
        assert!(FrameIndexSet::new(vec![2, 1], 5).is_err());
        assert!(FrameIndexSet::new(vec![0, 4], 4).is_err());
        assert!(FrameIndexSet::new(vec![0, 3], 4).is_ok());
    }

    #[test]
    fn intersection_size_counts_common_indices() {
        let a = FrameIndexSet::new(vec![1, 2, 5], 10).unwrap();
        let b = FrameIndexSet::new(vec![2, 3, 5], 10).unwrap();
        assert_eq!(a.intersection_size(&b), 2);
        assert_eq!(b.intersection_size(&a), 2);
        let c = FrameIndexSet::new(vec![0, 7], 10).unwrap();
        assert_eq!(a.intersection_size(&c), 0);
    }

    #[test]
    fn join_semicolon_formats_for_csv() {
        let s = FrameIndexSet::new(vec![1, 3, 5], 10).unwrap();
        assert_eq!(s.join_semicolon(), "1;3;5");
    }
}
