//! Selection primitives: stable softmax, deterministic top-N, and exact
//! binomial coefficients.

use crate::error::{Error, Result};
use crate::types::{FrameIndexSet, ImportanceVector};

/// Softmax with max-subtraction, so huge inputs do not overflow.
///
/// The output sums to 1 within 1e-9 and preserves the argsort of `values`
/// for any temperature > 0.
pub fn softmax(values: &[f64], temperature: f64) -> Result<ImportanceVector> {
    if values.is_empty() {
        return Err(Error::invalid("softmax input must be non-empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("softmax input must be finite"));
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid(format!(
            "softmax temperature must be a positive finite real, got {temperature}"
        )));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values
        .iter()
        .map(|v| ((v - max) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    ImportanceVector::new(exps.into_iter().map(|e| e / sum).collect())
}

/// The `n` indices with the largest scores, in increasing index order.
///
/// Ties are broken toward the smaller index, so the result is deterministic.
pub fn top_n_indices(scores: &ImportanceVector, n: usize) -> Result<FrameIndexSet> {
    top_n_of_slice(scores.scores(), n)
}

/// Slice variant of [`top_n_indices`] for raw score arrays.
pub fn top_n_of_slice(scores: &[f64], n: usize) -> Result<FrameIndexSet> {
    let t = scores.len();
    if n == 0 || n > t {
        return Err(Error::invalid(format!(
            "top-N count must satisfy 1 <= n <= {t}, got {n}"
        )));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("top-N scores must be finite"));
    }
    let mut order: Vec<usize> = (0..t).collect();
    // Descending by score, then ascending by index for equal scores.
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(n).collect();
    picked.sort_unstable();
    FrameIndexSet::new(picked, t)
}

/// Exact binomial coefficient C(t, n), or a capacity error when the value
/// does not fit in a `u64`.
pub fn binomial(t: u64, n: u64) -> Result<u64> {
    if n > t {
        return Err(Error::invalid(format!(
            "binomial requires n <= t, got t={t}, n={n}"
        )));
    }
    let k = n.min(t - n);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (t - k + i) is always divisible by i at this point, so the
        // division stays exact.
        acc = acc
            .checked_mul((t - k + i) as u128)
            .ok_or(Error::BinomialOverflow { t, n })?
            / i as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::BinomialOverflow { t, n });
        }
    }
    Ok(acc as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn softmax_of_equal_inputs_is_uniform() {
        let out = softmax(&[0.0, 0.0, 0.0], 1.0).unwrap();
        for p in out.scores() {
            assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn softmax_matches_direct_formula() {
        let out = softmax(&[2f64.ln(), 0.0], 1.0).unwrap();
        assert_relative_eq!(out.scores()[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(out.scores()[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn softmax_is_stable_for_huge_inputs() {
        let out = softmax(&[1000.0, 0.0], 1.0).unwrap();
        assert!(out.scores().iter().all(|p| p.is_finite()));
        assert_relative_eq!(out.scores()[0], 1.0, epsilon = 1e-9);
        assert!(out.scores()[1] >= 0.0 && out.scores()[1] < 1e-9);
    }

    #[test]
    fn softmax_rejects_bad_inputs() {
        assert!(softmax(&[1.0, f64::INFINITY], 1.0).is_err());
        assert!(softmax(&[1.0], 0.0).is_err());
        assert!(softmax(&[1.0], -1.0).is_err());
        assert!(softmax(&[], 1.0).is_err());
    }

    #[test]
    fn top_n_picks_largest_scores() {
        let s = ImportanceVector::new(vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let set = top_n_indices(&s, 2).unwrap();
        assert_eq!(set.indices(), &[1, 2]);
    }

    #[test]
    fn top_n_breaks_ties_toward_smaller_index() {
        let s = ImportanceVector::new(vec![0.5, 0.5, 0.5]).unwrap();
        let set = top_n_indices(&s, 2).unwrap();
        assert_eq!(set.indices(), &[0, 1]);
    }

    #[test]
    fn top_n_with_n_equal_t_returns_all() {
        let s = ImportanceVector::new(vec![0.9, 0.1]).unwrap();
        let set = top_n_indices(&s, 2).unwrap();
        assert_eq!(set.indices(), &[0, 1]);
    }

    #[test]
    fn top_n_rejects_out_of_range_n() {
        let s = ImportanceVector::new(vec![0.9, 0.1]).unwrap();
        assert!(top_n_indices(&s, 0).is_err());
        assert!(top_n_indices(&s, 3).is_err());
    }

    #[test]
    fn binomial_standard_values() {
        assert_eq!(binomial(10, 6).unwrap(), 210);
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert_eq!(binomial(52, 5).unwrap(), 2_598_960);
    }

    #[test]
    fn binomial_rejects_n_above_t() {
        assert!(binomial(3, 4).is_err());
    }

    #[test]
    fn binomial_overflow_is_a_capacity_error() {
        let err = binomial(100, 32).unwrap_err();
        assert!(err.is_capacity(), "C(100,32) exceeds u64: {err}");
        assert!(err.to_string().contains("100"));
        assert!(err.to_string().contains("32"));
    }

    /// Pascal-triangle oracle, independent of the multiplicative route.
    fn pascal(t: usize, n: usize) -> u128 {
        let mut row = vec![0u128; n + 1];
        row[0] = 1;
        for _ in 1..=t {
            for j in (1..=n).rev() {
                row[j] += row[j - 1];
            }
        }
        row[n]
    }

    #[test]
    fn binomial_matches_pascal_recurrence() {
        // C(60, 16) fits comfortably in 64 bits; value frozen from the
        // Pascal oracle below.
        assert_eq!(pascal(60, 16), 149_608_375_854_525);
        assert_eq!(binomial(60, 16).unwrap(), 149_608_375_854_525);
        for t in 0..=30u64 {
            for n in 0..=t {
                assert_eq!(
                    binomial(t, n).unwrap() as u128,
                    pascal(t as usize, n as usize),
                    "C({t},{n})"
                );
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Strictly increasing transforms leave the selected set alone.
            #[test]
            fn top_n_invariant_under_monotone_transform(
                scores in prop::collection::vec(-50.0f64..50.0, 1..24),
                n_frac in 0.0f64..1.0,
            ) {
                let t = scores.len();
                let n = 1 + ((t - 1) as f64 * n_frac) as usize;
                let base = top_n_of_slice(&scores, n).unwrap();
                let affine: Vec<f64> = scores.iter().map(|x| 2.0 * x + 1.0).collect();
                let expo: Vec<f64> = scores.iter().map(|x| x.exp()).collect();
                prop_assert_eq!(&base, &top_n_of_slice(&affine, n).unwrap());
                prop_assert_eq!(&base, &top_n_of_slice(&expo, n).unwrap());
            }

            /// Softmax preserves the argsort of its input for any temperature.
            /// Ranges keep |delta|/tau small enough that exp() cannot
            /// underflow to zero and collapse a strict ordering.
            #[test]
            fn softmax_preserves_argsort(
                values in prop::collection::vec(-30.0f64..30.0, 2..16),
                temperature in 0.5f64..10.0,
            ) {
                let out = softmax(&values, temperature).unwrap();
                let sum: f64 = out.scores().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                for i in 0..values.len() {
                    for j in 0..values.len() {
                        if values[i] > values[j] {
                            prop_assert!(out.scores()[i] > out.scores()[j]);
                        }
                    }
                }
            }

            /// Same input twice gives the identical set.
            #[test]
            fn top_n_is_deterministic(
                scores in prop::collection::vec(-5.0f64..5.0, 1..16),
            ) {
                let n = 1 + scores.len() / 2;
                let n = n.min(scores.len());
                let a = top_n_of_slice(&scores, n).unwrap();
                let b = top_n_of_slice(&scores, n).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
