//! Visit times of the reference set and the waiting-time processes
//!
//! * `Z_n = max{k <= n : T^k x ∈ A}` (0 with a flag when there is no such k),
//! * `Y_n = min{k > n : T^k x ∈ A}`,
//! * `V_n = Y_n - Z_n`.
//!
//! Visit times come from two independent engines. For the Farey map and
//! `A = K_1 = (1/2, 1]` the visits are `s_k - 1`, where `s_k` are the partial
//! sums of the continued-fraction digits ([`visits_from_digits`]). The orbit
//! engines in [`orbit`] and [`thaler`] iterate the map itself.

pub mod multiprec;
pub mod orbit;
pub mod thaler;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactreal::{DigitError, Digits};
use crate::maps::MapError;

pub use orbit::{cross_check, first_return, visits_from_orbit, CrossCheck, LazyOrbit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error("visit times known up to {horizon}, no visit after {n} yet")]
    HorizonInsufficient { n: u64, horizon: u64 },
    #[error("orbit absorbed at the fixed point 0 at time {time}")]
    OrbitTerminated { time: u64 },
    #[error("certified error bound straddles the set boundary at time {time}")]
    PrecisionDegraded { time: u64 },
    #[error("empty digit list")]
    NoDigits,
    #[error("point must lie in the reference set")]
    NotInReferenceSet,
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("visit-time mismatch at index {index}: digits {digits:?}, orbit {orbit:?}")]
    Mismatch {
        index: usize,
        digits: Option<u64>,
        orbit: Option<u64>,
    },
}

/// Strictly increasing visit times, complete up to `horizon`.
///
/// `terminated` marks an orbit that was absorbed and will never visit again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitTimes {
    pub times: Vec<u64>,
    pub horizon: u64,
    pub terminated: bool,
}

impl VisitTimes {
    pub fn new(times: Vec<u64>, horizon: u64, terminated: bool) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Self {
            times,
            horizon,
            terminated,
        }
    }

    /// Visits at times `<= t`.
    pub fn up_to(&self, t: u64) -> &[u64] {
        let end = self.times.partition_point(|&v| v <= t);
        &self.times[..end]
    }
}

/// One sample of `(Z_n, Y_n, V_n)` at horizon `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaitingRecord {
    pub n: u64,
    pub z: u64,
    pub y: u64,
    pub v: u64,
    /// Whether the point lies in `A_n = ∪_{k<=n} T^{-k} A`.
    pub in_a_n: bool,
}

impl WaitingRecord {
    pub const CSV_HEADER: &'static str = "n,Z,Y,V,in_A_n";

    pub fn from_parts(n: u64, last_visit: Option<u64>, next_visit: u64) -> Self {
        debug_assert!(next_visit > n);
        let z = last_visit.unwrap_or(0);
        Self {
            n,
            z,
            y: next_visit,
            v: next_visit - z,
            in_a_n: last_visit.is_some(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.n, self.z, self.y, self.v, self.in_a_n)
    }
}

/// Farey visits to K_1 from a digit prefix: `{s_k - 1}` with `s_k` the
/// partial sums.
pub fn visits_from_digits(digits: &[u64]) -> Result<VisitTimes, ProcessError> {
    if digits.is_empty() {
        return Err(ProcessError::NoDigits);
    }
    let times: Vec<u64> = digits
        .iter()
        .scan(0u64, |s, &d| {
            *s += d;
            Some(*s - 1)
        })
        .collect();
    let horizon = *times.last().expect("nonempty");
    Ok(VisitTimes::new(times, horizon, false))
}

/// `(Z_n, Y_n, V_n)` from a complete list of visit times.
pub fn waiting_record(visits: &VisitTimes, n: u64) -> Result<WaitingRecord, ProcessError> {
    let idx = visits.times.partition_point(|&t| t <= n);
    let next = visits.times.get(idx).copied();
    match next {
        Some(y) => {
            let last = idx.checked_sub(1).map(|i| visits.times[i]);
            Ok(WaitingRecord::from_parts(n, last, y))
        }
        None if visits.terminated => Err(ProcessError::OrbitTerminated { time: visits.horizon }),
        None => Err(ProcessError::HorizonInsufficient {
            n,
            horizon: visits.horizon,
        }),
    }
}

/// Everything the Farey experiments need about one point at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonSummary {
    pub record: WaitingRecord,
    /// `ψ_n`: number of digits whose sum stays `<= n`.
    pub psi: u64,
    /// `σ_n = κ_{ψ_n + 1}`, the digit straddling `n`.
    pub sigma: u64,
}

/// Push-driven summary of the Farey processes at a sorted list of horizons.
///
/// Feed digits with [`HorizonTracker::push`] until [`HorizonTracker::done`].
/// With partial sums `s_k` the visits are `s_k - 1`, so `Y_n` is known once
/// some `s_k >= n + 2`; `σ_n` needs the first `s_k > n`, which comes no later.
#[derive(Debug, Clone)]
pub struct HorizonTracker<'h> {
    horizons: &'h [u64],
    next: usize,
    sum: u64,
    count: u64,
    /// Horizons `n` with `s_{p+1} = n + 1`, waiting for one more digit.
    pending: Vec<(usize, HorizonSummary)>,
    out: Vec<Option<HorizonSummary>>,
}

impl<'h> HorizonTracker<'h> {
    pub fn new(horizons: &'h [u64]) -> Self {
        debug_assert!(horizons.windows(2).all(|w| w[0] <= w[1]));
        Self {
            horizons,
            next: 0,
            sum: 0,
            count: 0,
            pending: Vec::new(),
            out: vec![None; horizons.len()],
        }
    }

    #[inline]
    pub fn done(&self) -> bool {
        self.next == self.horizons.len() && self.pending.is_empty()
    }

    /// Partial sum of the digits pushed so far.
    pub fn digit_sum(&self) -> u64 {
        self.sum
    }

    #[inline]
    pub fn push(&mut self, digit: u64) {
        let new = self.sum.saturating_add(digit);
        if !self.pending.is_empty() {
            for (i, mut summary) in self.pending.drain(..) {
                summary.record = WaitingRecord::from_parts(summary.record.n, Some(summary.record.n), new - 1);
                self.out[i] = Some(summary);
            }
        }
        while self.next < self.horizons.len() && new > self.horizons[self.next] {
            let n = self.horizons[self.next];
            let record = if new == n + 1 {
                // A visit at time n itself; Y_n needs the next digit.
                WaitingRecord {
                    n,
                    z: n,
                    y: n + 1,
                    v: 1,
                    in_a_n: true,
                }
            } else {
                let last = if self.count >= 1 { Some(self.sum - 1) } else { None };
                WaitingRecord::from_parts(n, last, new - 1)
            };
            let summary = HorizonSummary {
                record,
                psi: self.count,
                sigma: digit,
            };
            if new == n + 1 {
                self.pending.push((self.next, summary));
            } else {
                self.out[self.next] = Some(summary);
            }
            self.next += 1;
        }
        self.sum = new;
        self.count += 1;
    }

    pub fn finish(self) -> Vec<HorizonSummary> {
        debug_assert!(self.done());
        self.out.into_iter().map(|s| s.expect("tracker finished")).collect()
    }
}

/// Stream digits once and summarise the Farey processes at each horizon.
///
/// `horizons` must be sorted ascending.
pub fn summarize_digits<D: Digits + ?Sized>(digits: &mut D, horizons: &[u64]) -> Result<Vec<HorizonSummary>, ProcessError> {
    let mut tracker = HorizonTracker::new(horizons);
    while !tracker.done() {
        tracker.push(digits.next_digit()?);
    }
    Ok(tracker.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactreal::{DigitStream, DEFAULT_BIT_CAP};

    fn visits(times: &[u64]) -> VisitTimes {
        VisitTimes::new(times.to_vec(), *times.last().unwrap(), false)
    }

    #[test]
    fn visits_from_digit_examples() {
        assert_eq!(visits_from_digits(&[1; 5]).unwrap().times, vec![0, 1, 2, 3, 4]);
        assert_eq!(visits_from_digits(&[2; 4]).unwrap().times, vec![1, 3, 5, 7]);
        assert_eq!(visits_from_digits(&[5]).unwrap().times, vec![4]);
        assert_eq!(visits_from_digits(&[]), Err(ProcessError::NoDigits));
    }

    #[test]
    fn waiting_record_examples() {
        let r = waiting_record(&visits(&[1, 3, 5, 7]), 4).unwrap();
        assert_eq!((r.z, r.y, r.v, r.in_a_n), (3, 5, 2, true));
        let r = waiting_record(&visits(&[4]), 3).unwrap();
        assert_eq!((r.z, r.y, r.v, r.in_a_n), (0, 4, 4, false));
        let dense: Vec<u64> = (0..20).collect();
        let r = waiting_record(&visits(&dense), 7).unwrap();
        assert_eq!((r.z, r.y, r.v), (7, 8, 1));
        assert_eq!(
            waiting_record(&visits(&[1, 3]), 3),
            Err(ProcessError::HorizonInsufficient { n: 3, horizon: 3 })
        );
        let done = VisitTimes::new(vec![0, 2], 2, true);
        assert_eq!(waiting_record(&done, 5), Err(ProcessError::OrbitTerminated { time: 2 }));
        assert_eq!(r.csv_row(), "7,7,8,1,true");
    }

    #[test]
    fn streaming_summary_matches_visit_lists() {
        let horizons: Vec<u64> = vec![0, 1, 2, 3, 5, 5, 8, 13, 40, 41, 200, 1000];
        for seed in 0..200 {
            let mut stream = DigitStream::lazy_dyadic(seed, DEFAULT_BIT_CAP);
            let summaries = summarize_digits(&mut stream, &horizons).unwrap();
            let digits = stream.emitted().to_vec();
            let v = visits_from_digits(&digits).unwrap();
            for (s, &n) in summaries.iter().zip(&horizons) {
                assert_eq!(s.record, waiting_record(&v, n).unwrap(), "seed {seed} n {n}");
                let sums: Vec<u64> = digits
                    .iter()
                    .scan(0, |a, &d| {
                        *a += d;
                        Some(*a)
                    })
                    .collect();
                let psi = sums.iter().take_while(|&&x| x <= n).count();
                assert_eq!(s.psi, psi as u64);
                assert_eq!(s.sigma, digits[psi]);
            }
        }
    }
}
