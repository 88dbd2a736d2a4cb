//! Fast sampler for the continued-fraction digits of a Lebesgue-random point.
//!
//! If x is uniform on [0, 1] and its first k digits are known, then
//! y = G^k(x) has density `(1 + r) / (1 + r y)^2` on [0, 1], where
//! `r = q_{k-1} / q_k` is the ratio of the last two convergent denominators.
//! Hence `P(κ_{k+1} >= j | r) = (1 + r) / (j + r)` and `r` updates as
//! `r' = 1 / (κ_{k+1} + r)`. Sampling this chain by inversion reproduces the
//! joint digit law of the exact lazy sampler in [`crate::exactreal`], but each
//! digit costs one uniform draw and two floating point divisions.
//!
//! The state `r` is a contraction of the digits, so rounding does not
//! accumulate. Digits are exact integers as long as they stay below 2^53;
//! larger digits (probability about 2^-53 per draw) saturate, which only
//! matters for statistics looking past that scale.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::exactreal::{DigitError, Digits};
use crate::processes::{HorizonSummary, HorizonTracker};
use crate::sampling::sample_rng;

/// Samples advanced together by [`summarize_chain_batch`].
pub const LANES: usize = 8;

/// Digit sampler driven by any random source.
#[derive(Debug, Clone)]
pub struct ChainDigits<R> {
    rng: R,
    ratio: f64,
}

impl<R: RngCore> ChainDigits<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, ratio: 0.0 }
    }

    /// Ratio `q_{k-1} / q_k` after the digits emitted so far.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    #[inline]
    pub fn sample(&mut self) -> u64 {
        // u in (0, 1]
        let u = 1.0 - self.rng.random::<f64>();
        let d = chain_digit(self.ratio, u);
        self.ratio = 1.0 / (d as f64 + self.ratio);
        d
    }
}

/// Inverse-CDF step: the largest j with `(1 + r) / (j + r) >= u`.
#[inline]
pub fn chain_digit(ratio: f64, u: f64) -> u64 {
    let v = ((1.0 + ratio) / u - ratio).floor();
    // `as` saturates, and v >= 1 for u in (0, 1].
    (v as u64).max(1)
}

impl<R: RngCore> Digits for ChainDigits<R> {
    fn next_digit(&mut self) -> Result<u64, DigitError> {
        Ok(self.sample())
    }
}

struct Lane<'h> {
    index: usize,
    chain: ChainDigits<ChaCha8Rng>,
    tracker: HorizonTracker<'h>,
}

/// Horizon summaries of samples `start..end` of a run, sample `i` drawing
/// from `sample_rng(master, stream, i)`.
///
/// Equivalent to calling [`crate::processes::summarize_digits`] on one
/// [`ChainDigits`] per sample. Several samples are advanced in turn so that
/// their independent division chains overlap in the pipeline.
pub fn summarize_chain_batch(master: u64, stream: u64, start: usize, end: usize, horizons: &[u64]) -> Vec<Vec<HorizonSummary>> {
    let mut out: Vec<Option<Vec<HorizonSummary>>> = vec![None; end.saturating_sub(start)];
    let mut next = start;
    let spawn = |next: &mut usize| -> Option<Lane<'_>> {
        (*next < end).then(|| {
            let index = *next;
            *next += 1;
            Lane {
                index,
                chain: ChainDigits::new(sample_rng(master, stream, index as u64)),
                tracker: HorizonTracker::new(horizons),
            }
        })
    };
    let mut lanes: Vec<Lane<'_>> = (0..LANES).map_while(|_| spawn(&mut next)).collect();
    while !lanes.is_empty() {
        for lane in lanes.iter_mut() {
            lane.tracker.push(lane.chain.sample());
        }
        let mut k = 0;
        while k < lanes.len() {
            if lanes[k].tracker.done() {
                let lane = match spawn(&mut next) {
                    Some(fresh) => std::mem::replace(&mut lanes[k], fresh),
                    None => lanes.swap_remove(k),
                };
                out[lane.index - start] = Some(lane.tracker.finish());
                continue;
            }
            k += 1;
        }
    }
    out.into_iter().map(|o| o.expect("every lane finishes")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tail_probabilities_match_conditional_law() {
        for &r in &[0.0, 0.3, 0.61, 1.0] {
            for j in 1..50u64 {
                // u just below P(κ >= j) yields j, just above yields j - 1.
                let p = (1.0 + r) / (j as f64 + r);
                assert_eq!(chain_digit(r, p * (1.0 - 1e-12)), j, "r={r} j={j}");
                if j >= 2 {
                    assert_eq!(chain_digit(r, p * (1.0 + 1e-9)), j - 1, "r={r} j={j}");
                }
            }
        }
    }

    #[test]
    fn first_digit_is_lebesgue() {
        let mut chain = ChainDigits::new(ChaCha8Rng::seed_from_u64(1));
        let n = 200_000;
        let mut ones = 0;
        for _ in 0..n {
            chain.ratio = 0.0;
            if chain.sample() == 1 {
                ones += 1;
            }
        }
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn batch_matches_one_sample_at_a_time() {
        use crate::processes::summarize_digits;
        let horizons = [1u64, 10, 300, 5000];
        let batch = summarize_chain_batch(4, 2, 3, 40, &horizons);
        assert_eq!(batch.len(), 37);
        for (k, got) in batch.iter().enumerate() {
            let mut chain = ChainDigits::new(sample_rng(4, 2, 3 + k as u64));
            assert_eq!(got, &summarize_digits(&mut chain, &horizons).unwrap());
        }
        assert!(summarize_chain_batch(4, 2, 5, 5, &horizons).is_empty());
    }

    #[test]
    fn ratio_tracks_convergent_denominators() {
        let mut chain = ChainDigits::new(ChaCha8Rng::seed_from_u64(9));
        let (mut q0, mut q1) = (0f64, 1f64);
        for _ in 0..20 {
            let d = chain.sample();
            let q2 = d as f64 * q1 + q0;
            q0 = q1;
            q1 = q2;
            assert!((chain.ratio() - q0 / q1).abs() < 1e-12);
        }
    }
}
