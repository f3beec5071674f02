//! Training losses: the pairwise ranking loss on importance scores, its
//! squared-difference alternative, and the cross-entropy label guidance.
//!
//! The ranking hinge is oriented so that the loss is zero when the predicted
//! scores respect the target order with margin gamma; the published form of
//! the formula (which instead grows when the prediction agrees with the
//! target) is kept available as [`SoLossKind::RankingPrinted`] for study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::select::softmax;

/// Which importance-matching loss to use for the sampler head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoLossKind {
    /// Hinge on gamma - (s_i - s_j) over pairs with p_i > p_j.
    Ranking,
    /// The formula as published: hinge on gamma + (s_i - s_j). Rewards
    /// reversals; kept behind this flag for comparison only.
    RankingPrinted,
    /// Squared difference between softmaxed scores and targets.
    Mse,
}

/// Loss value plus gradient with respect to the raw importance scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLoss {
    pub loss: f64,
    pub score_grads: Vec<f64>,
}

fn check_lengths(targets: &[f64], scores: &[f64]) -> Result<()> {
    if targets.len() != scores.len() {
        return Err(Error::invalid(format!(
            "target/score length mismatch: {} vs {}",
            targets.len(),
            scores.len()
        )));
    }
    if targets.len() < 2 {
        return Err(Error::invalid("ranking losses need at least two frames"));
    }
    Ok(())
}

/// Pairwise hinge: sum over all ordered pairs (i, j) with target_i > target_j
/// of max(gamma - (score_i - score_j), 0).
///
/// Only the order of `targets` matters. The subgradient at the hinge kink
/// takes the zero branch, so zero loss implies zero gradient.
pub fn ranking_loss(targets: &[f64], scores: &[f64], gamma: f64) -> Result<ScoreLoss> {
    check_lengths(targets, scores)?;
    if !(gamma >= 0.0) {
        return Err(Error::invalid("margin gamma must be >= 0"));
    }
    let t = targets.len();
    let mut loss = 0.0;
    let mut score_grads = vec![0.0; t];
    for i in 0..t {
        for j in 0..t {
            if targets[i] > targets[j] {
                let hinge = gamma - (scores[i] - scores[j]);
                if hinge > 0.0 {
                    loss += hinge;
                    score_grads[i] -= 1.0;
                    score_grads[j] += 1.0;
                }
            }
        }
    }
    Ok(ScoreLoss { loss, score_grads })
}

/// The printed variant: max(gamma + score_i - score_j, 0) over the same pair
/// set. Increases when the prediction agrees with the target order.
pub fn ranking_loss_printed(targets: &[f64], scores: &[f64], gamma: f64) -> Result<ScoreLoss> {
    check_lengths(targets, scores)?;
    if !(gamma >= 0.0) {
        return Err(Error::invalid("margin gamma must be >= 0"));
    }
    let t = targets.len();
    let mut loss = 0.0;
    let mut score_grads = vec![0.0; t];
    for i in 0..t {
        for j in 0..t {
            if targets[i] > targets[j] {
                let hinge = gamma + scores[i] - scores[j];
                if hinge > 0.0 {
                    loss += hinge;
                    score_grads[i] += 1.0;
                    score_grads[j] -= 1.0;
                }
            }
        }
    }
    Ok(ScoreLoss { loss, score_grads })
}

/// Squared difference between softmax(scores) and the target distribution,
/// backpropagated through the softmax.
pub fn mse_importance_loss(targets: &[f64], scores: &[f64]) -> Result<ScoreLoss> {
    check_lengths(targets, scores)?;
    let probs = softmax(scores, 1.0)?;
    let p = probs.scores();
    let mut loss = 0.0;
    let mut dp = vec![0.0; p.len()];
    for ((pi, ti), d) in p.iter().zip(targets).zip(dp.iter_mut()) {
        let diff = pi - ti;
        loss += diff * diff;
        *d = 2.0 * diff;
    }
    // Softmax Jacobian: ds_i = p_i * (dp_i - sum_j dp_j p_j).
    let weighted: f64 = dp.iter().zip(p).map(|(d, pi)| d * pi).sum();
    let score_grads = p
        .iter()
        .zip(&dp)
        .map(|(pi, d)| pi * (d - weighted))
        .collect();
    Ok(ScoreLoss { loss, score_grads })
}

/// Evaluate the selected importance loss.
pub fn so_loss(kind: SoLossKind, targets: &[f64], scores: &[f64], gamma: f64) -> Result<ScoreLoss> {
    match kind {
        SoLossKind::Ranking => ranking_loss(targets, scores, gamma),
        SoLossKind::RankingPrinted => ranking_loss_printed(targets, scores, gamma),
        SoLossKind::Mse => mse_importance_loss(targets, scores),
    }
}

/// Cross-entropy on the video-level logits: loss plus gradient in logit
/// space (softmax minus one-hot).
pub fn label_guidance_loss(video_logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= video_logits.len() {
        return Err(Error::invalid(format!(
            "label {label} out of range for {} classes",
            video_logits.len()
        )));
    }
    let probs = softmax(video_logits, 1.0)?;
    let p = probs.scores();
    let loss = -p[label].ln();
    let mut grads = p.to_vec();
    grads[label] -= 1.0;
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ranking_loss_single_reversed_pair() {
        let out = ranking_loss(&[0.7, 0.3], &[0.2, 0.8], 0.1).unwrap();
        assert_relative_eq!(out.loss, 0.7, epsilon = 1e-12);
        assert_eq!(out.score_grads, vec![-1.0, 1.0]);
    }

    #[test]
    fn ranking_loss_zero_when_order_respected_with_margin() {
        let out = ranking_loss(&[0.5, 0.3, 0.2], &[3.0, 1.0, -1.0], 0.1).unwrap();
        assert_eq!(out.loss, 0.0);
        assert!(out.score_grads.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn ranking_loss_zero_for_all_equal_targets() {
        let out = ranking_loss(&[0.25; 4], &[1.0, -2.0, 3.0, 0.0], 0.1).unwrap();
        assert_eq!(out.loss, 0.0);
    }

    #[test]
    fn ranking_loss_rejects_bad_inputs() {
        assert!(ranking_loss(&[0.5, 0.5], &[1.0], 0.1).is_err());
        assert!(ranking_loss(&[0.5], &[1.0], 0.1).is_err());
        assert!(ranking_loss(&[0.5, 0.4], &[1.0, 0.0], -0.1).is_err());
    }

    #[test]
    fn printed_form_rewards_reversals() {
        // Same inputs as the reversed-pair case: the printed form is zero
        // exactly where the intended form penalizes.
        let printed = ranking_loss_printed(&[0.7, 0.3], &[0.2, 0.8], 0.1).unwrap();
        assert_relative_eq!(printed.loss, 0.0);
        // And it grows when the prediction agrees with the target order.
        let agreeing = ranking_loss_printed(&[0.7, 0.3], &[0.8, 0.2], 0.1).unwrap();
        assert_relative_eq!(agreeing.loss, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn mse_loss_vanishes_at_exact_match() {
        let targets = softmax(&[0.3, -0.2, 0.9], 1.0).unwrap();
        let out = mse_importance_loss(targets.scores(), &[0.3, -0.2, 0.9]).unwrap();
        assert!(out.loss < 1e-20);
        assert!(out.score_grads.iter().all(|g| g.abs() < 1e-10));
    }

    #[test]
    fn label_guidance_examples() {
        // Perfect prediction: a huge logit on the label drives the loss to 0.
        let (loss, _) = label_guidance_loss(&[40.0, 0.0, 0.0], 0).unwrap();
        assert!(loss.abs() < 1e-12);

        // Uniform over 4 classes.
        let (loss, grads) = label_guidance_loss(&[0.0; 4], 2).unwrap();
        assert_relative_eq!(loss, 4.0f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(grads[2], 0.25 - 1.0, epsilon = 1e-12);
        assert_relative_eq!(grads[0], 0.25, epsilon = 1e-12);

        // Probability e^-1 on the label gives loss exactly 1.
        // softmax([0, ln(e-1)])[0] = 1/e.
        let (loss, _) = label_guidance_loss(&[0.0, (std::f64::consts::E - 1.0).ln()], 0).unwrap();
        assert_relative_eq!(loss, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn label_guidance_rejects_out_of_range_label() {
        assert!(label_guidance_loss(&[0.0, 0.0], 2).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Adding a constant to all scores leaves the hinge unchanged.
            #[test]
            fn ranking_loss_is_translation_invariant(
                targets in prop::collection::vec(0.0f64..1.0, 2..10),
                scores in prop::collection::vec(-5.0f64..5.0, 2..10),
                shift in -10.0f64..10.0,
            ) {
                let n = targets.len().min(scores.len());
                let t = &targets[..n];
                let s = &scores[..n];
                let shifted: Vec<f64> = s.iter().map(|v| v + shift).collect();
                let a = ranking_loss(t, s, 0.05).unwrap();
                let b = ranking_loss(t, &shifted, 0.05).unwrap();
                prop_assert!((a.loss - b.loss).abs() < 1e-9);
            }

            /// Only the order of the targets matters: any strictly increasing
            /// transform of the targets gives the identical loss.
            #[test]
            fn ranking_loss_depends_on_target_order_only(
                targets in prop::collection::vec(-3.0f64..3.0, 2..10),
                scores in prop::collection::vec(-5.0f64..5.0, 2..10),
            ) {
                let n = targets.len().min(scores.len());
                let t = &targets[..n];
                let s = &scores[..n];
                let warped: Vec<f64> = t.iter().map(|v| (3.0 * v).exp()).collect();
                let a = ranking_loss(t, s, 0.05).unwrap();
                let b = ranking_loss(&warped, s, 0.05).unwrap();
                prop_assert_eq!(a.loss.to_bits(), b.loss.to_bits());
                prop_assert_eq!(a.score_grads, b.score_grads);
            }

            /// All three losses are non-negative.
            #[test]
            fn losses_are_non_negative(
                targets in prop::collection::vec(0.0f64..1.0, 2..8),
                scores in prop::collection::vec(-4.0f64..4.0, 2..8),
            ) {
                let n = targets.len().min(scores.len());
                let t = &targets[..n];
                let s = &scores[..n];
                for kind in [SoLossKind::Ranking, SoLossKind::RankingPrinted, SoLossKind::Mse] {
                    prop_assert!(so_loss(kind, t, s, 0.05).unwrap().loss >= 0.0);
                }
            }
        }
    }
}
