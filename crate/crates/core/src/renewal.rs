//! Heavy-tailed renewal surrogate.
//!
//! Waiting times are i.i.d. with `P(τ > n) = n^{-α}` for every integer
//! `n >= 1`, the renewal starts with a visit at time 0, and visits happen at
//! the partial sums `S_k = τ_1 + … + τ_k`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::WanderingSequence;
use crate::processes::{VisitTimes, WaitingRecord};
use crate::sampling::sample_rng;

/// Longest prefix of `W_n` tabulated before switching to Euler–Maclaurin.
pub const WANDERING_TABLE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenewalError {
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    Alpha(f64),
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("at least one sample is required")]
    Samples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalConfig {
    pub alpha: f64,
    pub horizon: u64,
    pub samples: usize,
    pub seed: u64,
}

impl RenewalConfig {
    pub fn validate(&self) -> Result<(), RenewalError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(RenewalError::Alpha(self.alpha));
        }
        if self.horizon < 1 {
            return Err(RenewalError::Horizon);
        }
        if self.samples < 1 {
            return Err(RenewalError::Samples);
        }
        Ok(())
    }
}

/// `⌈u^{-1/α}⌉`, saturating at `u64::MAX`.
#[inline]
pub fn sample_tau(u: f64, alpha: f64) -> u64 {
    let t = u.powf(-1.0 / alpha).ceil();
    if t >= u64::MAX as f64 {
        u64::MAX
    } else {
        (t as u64).max(1)
    }
}

#[inline]
fn draw_tau<R: RngCore>(rng: &mut R, alpha: f64) -> u64 {
    // u in (0, 1]
    sample_tau(1.0 - rng.random::<f64>(), alpha)
}

/// Visits `{0, S_1, S_2, …}` up to and including the first `S_k > horizon`.
///
/// Returns `None` if the waiting times run out before passing the horizon.
pub fn visits_from_taus(taus: &[u64], horizon: u64) -> Option<VisitTimes> {
    let mut times = vec![0u64];
    let mut s = 0u64;
    for &t in taus {
        if s > horizon {
            break;
        }
        s = s.saturating_add(t);
        times.push(s);
    }
    (s > horizon).then(|| VisitTimes::new(times, s, false))
}

/// Visit times of sample `index` of a configured run.
pub fn renewal_visits(config: &RenewalConfig, index: u64) -> VisitTimes {
    let mut rng = sample_rng(config.seed, 0, index);
    let mut times = vec![0u64];
    let mut s = 0u64;
    while s <= config.horizon {
        s = s.saturating_add(draw_tau(&mut rng, config.alpha));
        times.push(s);
    }
    VisitTimes::new(times, s, false)
}

/// `(Z_n, Y_n, V_n)` of one renewal path drawn from `rng`, without storing
/// the visit list.
pub fn renewal_record<R: RngCore>(rng: &mut R, alpha: f64, n: u64) -> WaitingRecord {
    let mut s = 0u64;
    loop {
        let next = s.saturating_add(draw_tau(rng, alpha));
        if next > n {
            return WaitingRecord::from_parts(n, Some(s), next);
        }
        s = next;
    }
}

/// Record of sample `index` of a configured run; agrees with
/// [`renewal_visits`] for the same index.
pub fn sample_record(config: &RenewalConfig, index: u64) -> WaitingRecord {
    let mut rng = sample_rng(config.seed, 0, index);
    renewal_record(&mut rng, config.alpha, config.horizon)
}

/// `W_n = 1 + Σ_{k=1}^n k^{-α}`.
pub fn renewal_wandering(alpha: f64, n: u64) -> WanderingSequence {
    let len = (n as usize).saturating_add(1).min(WANDERING_TABLE);
    WanderingSequence::power_tail(alpha, len)
}
