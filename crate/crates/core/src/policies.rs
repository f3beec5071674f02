//! Frame sampling policies and their evaluation harness.
//!
//! Four policies are compared throughout: evenly spaced selection
//! (`uniform_policy`), seeded random selection (`random_policy`), the
//! brute-force optimum over all C(T, N) subsets (`optimal_policy`), and the
//! O(T) per-frame-confidence surrogate (`semi_optimal_policy`). The
//! brute-force search is deliberately guarded by a subset budget: the point
//! of the surrogate is that exhaustive enumeration stops being an option
//! long before T and N get interesting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::classifier::{ClassifierSpec, SyntheticVideo};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::select::{binomial, top_n_of_slice};
use crate::types::{ConfidenceVector, FrameIndexSet};

/// How a frame's C-class confidence vector collapses to one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationMode {
    /// Confidence assigned to the true label.
    #[serde(rename = "true-label")]
    TrueLabel,
    /// Maximum confidence across all classes.
    #[serde(rename = "max")]
    MaxOverClasses,
}

impl AggregationMode {
    pub fn frame_score(&self, confidence: &ConfidenceVector, label: usize) -> Result<f64> {
        match self {
            AggregationMode::TrueLabel => confidence.class_prob(label),
            AggregationMode::MaxOverClasses => Ok(confidence.max_prob()),
        }
    }
}

/// Default cap on brute-force subset enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// The outcome of running one policy on one video.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyResult {
    pub policy_name: String,
    pub selected: FrameIndexSet,
    /// Classifier confidence on the true label for the selected clip.
    pub clip_confidence: f64,
    /// Classifier invocations attributed to the selection itself.
    pub classifier_calls: u64,
}

/// Policies known to the evaluation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Uniform,
    Random,
    Optimal,
    SemiOptimal,
    /// Feed every candidate frame, no sampling.
    All,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::Random => "random",
            PolicyKind::Optimal => "optimal",
            PolicyKind::SemiOptimal => "semi-optimal",
            PolicyKind::All => "all",
        }
    }
}

/// Evenly spaced frame indices: floor(k*T/N) + floor(T/(2N)) for k = 0..N-1,
/// clamped to [0, T), collisions shifted right to the next free slot.
pub fn uniform_policy(t: usize, n: usize) -> Result<FrameIndexSet> {
    if n == 0 || n > t {
        return Err(Error::invalid(format!(
            "uniform policy needs 1 <= N <= T, got N={n}, T={t}"
        )));
    }
    let offset = t / (2 * n);
    let mut used = vec![false; t];
    let mut picked = Vec::with_capacity(n);
    for k in 0..n {
        let mut pos = (k * t / n + offset).min(t - 1);
        while pos < t && used[pos] {
            pos += 1;
        }
        if pos == t {
            pos = used.iter().position(|u| !u).expect("n <= t leaves a free slot");
        }
        used[pos] = true;
        picked.push(pos);
    }
    picked.sort_unstable();
    FrameIndexSet::new(picked, t)
}

/// Uniform sample of N distinct indices without replacement.
pub fn random_policy(t: usize, n: usize, seed: u64) -> Result<FrameIndexSet> {
    if n == 0 || n > t {
        return Err(Error::invalid(format!(
            "random policy needs 1 <= N <= T, got N={n}, T={t}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, t, n).into_vec();
    picked.sort_unstable();
    FrameIndexSet::new(picked, t)
}

/// Visit every N-combination of 0..T in lexicographic order.
fn for_each_combination<F>(t: usize, n: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        visit(&idx)?;
        // Rightmost position that can still advance.
        let mut i = n;
        while i > 0 && idx[i - 1] == t - n + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return Ok(());
        }
        idx[i - 1] += 1;
        for j in i..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Brute-force optimal policy: evaluate every C(T, N) subset and keep the
/// one with maximal true-label confidence (ties: lexicographically smallest
/// subset, i.e. the first one found).
///
/// Refuses to run when C(T, N) exceeds `budget`; the resulting capacity
/// error carries the exact subset count.
pub fn optimal_policy(
    spec: &ClassifierSpec,
    video: &SyntheticVideo,
    n: usize,
    budget: u64,
) -> Result<PolicyResult> {
    let t = video.num_frames();
    if n == 0 || n > t {
        return Err(Error::invalid(format!(
            "optimal policy needs 1 <= N <= T, got N={n}, T={t}"
        )));
    }
    let subsets = binomial(t as u64, n as u64)?;
    if subsets > budget {
        return Err(Error::EnumerationBudget {
            t,
            n,
            subsets,
            budget,
        });
    }
    let label = video.label();
    let mut best: Option<(f64, FrameIndexSet)> = None;
    for_each_combination(t, n, |indices| {
        let subset = FrameIndexSet::new(indices.to_vec(), t)?;
        let conf = spec.classify_clip(video, &subset)?.class_prob(label)?;
        let better = match &best {
            Some((best_conf, _)) => conf > *best_conf,
            None => true,
        };
        if better {
            best = Some((conf, subset));
        }
        Ok(())
    })?;
    let (clip_confidence, selected) = best.expect("at least one subset");
    Ok(PolicyResult {
        policy_name: PolicyKind::Optimal.name().to_string(),
        selected,
        clip_confidence,
        classifier_calls: subsets,
    })
}

/// Semi-optimal policy: score every frame with one single-frame classifier
/// call, aggregate per `mode`, take the top N. Costs exactly T scoring
/// calls; the final confidence evaluation of the chosen clip is recorded
/// separately.
pub fn semi_optimal_policy(
    spec: &ClassifierSpec,
    video: &SyntheticVideo,
    n: usize,
    mode: AggregationMode,
) -> Result<PolicyResult> {
    let t = video.num_frames();
    if n == 0 || n > t {
        return Err(Error::invalid(format!(
            "semi-optimal policy needs 1 <= N <= T, got N={n}, T={t}"
        )));
    }
    let label = video.label();
    let mut scores = Vec::with_capacity(t);
    for frame in 0..t {
        let conf = spec.classify_frame(video, frame)?;
        scores.push(mode.frame_score(&conf, label)?);
    }
    let selected = top_n_of_slice(&scores, n)?;
    let clip_confidence = spec.classify_clip(video, &selected)?.class_prob(label)?;
    Ok(PolicyResult {
        policy_name: PolicyKind::SemiOptimal.name().to_string(),
        selected,
        clip_confidence,
        classifier_calls: t as u64,
    })
}

/// |target ∩ optimal| / N for two sets of equal size N.
pub fn sampling_fidelity(target: &FrameIndexSet, optimal: &FrameIndexSet) -> Result<f64> {
    if target.len() != optimal.len() {
        return Err(Error::invalid(format!(
            "fidelity needs equal sizes, got {} vs {}",
            target.len(),
            optimal.len()
        )));
    }
    Ok(target.intersection_size(optimal) as f64 / target.len() as f64)
}

/// Options shared by a policy-evaluation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub aggregation: AggregationMode,
    pub enumeration_budget: u64,
    /// Base seed for the random policy; video i draws from
    /// derive_seed(seed, i).
    pub seed: u64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            aggregation: AggregationMode::TrueLabel,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            seed: 0,
        }
    }
}

/// Per-policy corpus means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub mean_confidence: f64,
    /// Mean fidelity to the optimal set; absent when the optimal policy was
    /// not part of the run.
    pub mean_fidelity: Option<f64>,
    pub mean_calls: f64,
}

/// Results of evaluating a set of policies over a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    /// results[video][policy position in `policies`]
    pub per_video: Vec<Vec<PolicyResult>>,
    pub summary: BTreeMap<String, PolicySummary>,
}

fn run_one_policy(
    kind: PolicyKind,
    spec: &ClassifierSpec,
    video: &SyntheticVideo,
    n: usize,
    opts: &EvaluationOptions,
    video_seed: u64,
) -> Result<PolicyResult> {
    let t = video.num_frames();
    let label = video.label();
    let evaluate_set = |selected: FrameIndexSet, name: &str| -> Result<PolicyResult> {
        let clip_confidence = spec.classify_clip(video, &selected)?.class_prob(label)?;
        Ok(PolicyResult {
            policy_name: name.to_string(),
            selected,
            clip_confidence,
            classifier_calls: 1,
        })
    };
    match kind {
        PolicyKind::Uniform => evaluate_set(uniform_policy(t, n)?, kind.name()),
        PolicyKind::Random => evaluate_set(random_policy(t, n, video_seed)?, kind.name()),
        PolicyKind::All => evaluate_set(FrameIndexSet::all(t)?, kind.name()),
        PolicyKind::Optimal => optimal_policy(spec, video, n, opts.enumeration_budget),
        PolicyKind::SemiOptimal => semi_optimal_policy(spec, video, n, opts.aggregation),
    }
}

/// Evaluate `policies` on every video of `corpus` and aggregate.
///
/// Videos are processed in parallel; results are merged in video order, so
/// the report does not depend on the worker count. Fidelity columns are
/// filled only when [`PolicyKind::Optimal`] is among the requested policies.
pub fn evaluate_policies(
    spec: &ClassifierSpec,
    corpus: &[SyntheticVideo],
    n: usize,
    policies: &[PolicyKind],
    opts: &EvaluationOptions,
) -> Result<EvaluationReport> {
    if corpus.is_empty() {
        return Err(Error::invalid("corpus must be non-empty"));
    }
    if policies.is_empty() {
        return Err(Error::invalid("at least one policy must be requested"));
    }
    let per_video: Vec<Vec<PolicyResult>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, video)| {
            let video_seed = derive_seed(opts.seed, i as u64);
            policies
                .iter()
                .map(|kind| run_one_policy(*kind, spec, video, n, opts, video_seed))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let optimal_pos = policies.iter().position(|p| *p == PolicyKind::Optimal);
    let mut summary = BTreeMap::new();
    for (pi, kind) in policies.iter().enumerate() {
        let mut conf = 0.0;
        let mut calls = 0.0;
        let mut fidelity = 0.0;
        // Fidelity is defined for equal sizes only; the "all" baseline
        // selects T frames and gets no fidelity column.
        let fidelity_defined = optimal_pos
            .map(|oi| per_video[0][pi].selected.len() == per_video[0][oi].selected.len())
            .unwrap_or(false);
        for row in &per_video {
            conf += row[pi].clip_confidence;
            calls += row[pi].classifier_calls as f64;
            if fidelity_defined {
                let oi = optimal_pos.expect("fidelity_defined implies optimal");
                fidelity += sampling_fidelity(&row[pi].selected, &row[oi].selected)?;
            }
        }
        let count = per_video.len() as f64;
        summary.insert(
            kind.name().to_string(),
            PolicySummary {
                mean_confidence: conf / count,
                mean_fidelity: fidelity_defined.then(|| fidelity / count),
                mean_calls: calls / count,
            },
        );
    }
    Ok(EvaluationReport { per_video, summary })
}
