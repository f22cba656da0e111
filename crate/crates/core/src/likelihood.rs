//! Likelihood of repeated observations of one pixel under the discrete
//! random-valued impulse model, and its maximizer.
//!
//! A clean value `u` is observed unchanged with probability `1 - p + p/256`
//! and as any other value with probability `p/256`. The likelihood therefore
//! only depends on how many observations equal `u`, and is increasing in that
//! count, so maximizing it is the same as minimizing the l0 mismatch count.

use crate::error::{Error, Result};

/// Log-likelihood of `samples` given clean value `u` and corruption rate `p`.
pub fn impulse_log_likelihood(samples: &[u8], u: u8, p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one sample is required".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} is outside (0, 1)"
        )));
    }
    let n = samples.len();
    let matches = samples.iter().filter(|&&v| v == u).count();
    let hit = 1.0 - p + p / 256.0;
    let miss = p / 256.0;
    Ok(matches as f64 * hit.ln() + (n - matches) as f64 * miss.ln())
}

/// Most frequent sample value; ties go to the smallest value.
///
/// `p` does not influence the result, it is accepted so the call mirrors the
/// likelihood it maximizes.
pub fn mle_pixel(samples: &[u8], p: f64) -> Result<u8> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one sample is required".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} is outside (0, 1)"
        )));
    }
    let mut counts = [0usize; 256];
    for &s in samples {
        counts[usize::from(s)] += 1;
    }
    let mut best = 0u8;
    for v in 1..=255u8 {
        if counts[usize::from(v)] > counts[usize::from(best)] {
            best = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l0_sum(samples: &[u8], u: u8) -> usize {
        samples.iter().filter(|&&v| v != u).count()
    }

    #[test]
    fn single_sample_values() {
        let hit = impulse_log_likelihood(&[5], 5, 0.5).unwrap();
        assert_eq!(hit, 0.501953125f64.ln());
        let miss = impulse_log_likelihood(&[5], 7, 0.5).unwrap();
        assert_eq!(miss, (0.5f64 / 256.0).ln());
    }

    #[test]
    fn rejects_bad_p_and_empty() {
        assert!(impulse_log_likelihood(&[1], 1, 0.0).is_err());
        assert!(impulse_log_likelihood(&[1], 1, 1.0).is_err());
        assert!(impulse_log_likelihood(&[], 1, 0.5).is_err());
        assert!(mle_pixel(&[], 0.5).is_err());
    }

    #[test]
    fn mode_examples() {
        assert_eq!(mle_pixel(&[7, 7, 3, 200], 0.3).unwrap(), 7);
        assert_eq!(mle_pixel(&[1, 1, 2, 2], 0.3).unwrap(), 1);
        assert_eq!(mle_pixel(&[42], 0.3).unwrap(), 42);
        assert_eq!(mle_pixel(&[255, 255, 0], 0.3).unwrap(), 255);
    }

    #[test]
    fn mode_matches_brute_force_l0_argmin() {
        let samples = [7u8, 7, 3, 200];
        let brute = (0..=255u8)
            .min_by_key(|&u| (l0_sum(&samples, u), u))
            .unwrap();
        assert_eq!(brute, 7);
    }

    #[test]
    fn likelihood_strictly_increasing_in_match_count() {
        let samples = [3u8, 3, 3, 9, 9, 100, 7];
        for p in [0.1, 0.5, 0.9] {
            let mut by_n: Vec<(usize, f64)> = (0..=255u8)
                .map(|u| {
                    let n = samples.len() - l0_sum(&samples, u);
                    (n, impulse_log_likelihood(&samples, u, p).unwrap())
                })
                .collect();
            by_n.sort_by_key(|e| e.0);
            for w in by_n.windows(2) {
                if w[0].0 < w[1].0 {
                    assert!(w[0].1 < w[1].1);
                } else {
                    assert_eq!(w[0].1, w[1].1);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn mode_is_likelihood_argmax(
            samples in prop::collection::vec(any::<u8>(), 1..=10),
            p in 0.01f64..0.99,
        ) {
            let mle = mle_pixel(&samples, p).unwrap();
            let best = impulse_log_likelihood(&samples, mle, p).unwrap();
            for u in 0..=255u8 {
                let ll = impulse_log_likelihood(&samples, u, p).unwrap();
                prop_assert!(ll <= best);
                if ll == best {
                    prop_assert!(u >= mle);
                }
            }
        }
    }
}
