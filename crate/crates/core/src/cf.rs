//! Digit-sum processes of continued fractions.
//!
//! `ψ_n = max{p : κ_1 + … + κ_p <= n}` counts the digits that fit below `n`
//! and `σ_n = κ_{ψ_n + 1}` is the digit whose block straddles `n`. For the
//! Farey map with `A = (1/2, 1]`, `σ_n` is `V_{n-1}` when the point lies in
//! `A_{n-1}` and `1 + Y_{n-1}` otherwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::ld_rate_h;
use crate::processes::{visits_from_digits, waiting_record, ProcessError, WaitingRecord};
use crate::stats::wilson_interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfError {
    #[error("digits sum to {sum}, which does not exceed n = {n}")]
    TooFewDigits { sum: u64, n: u64 },
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("x must be positive")]
    NonPositive,
    #[error(transparent)]
    Process(#[from] ProcessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StraddleRecord {
    pub n: u64,
    pub psi: u64,
    pub sigma: u64,
    /// Whether the point lies in `A_{n-1}`, i.e. `κ_1 <= n`.
    pub in_a_prev: bool,
}

/// `ψ_n` and `σ_n` from a digit prefix whose sum exceeds `n`.
pub fn straddle(digits: &[u64], n: u64) -> Result<StraddleRecord, CfError> {
    let mut sum = 0u64;
    for (p, &d) in digits.iter().enumerate() {
        let next = sum.saturating_add(d);
        if next > n {
            return Ok(StraddleRecord {
                n,
                psi: p as u64,
                sigma: d,
                in_a_prev: digits[0] <= n,
            });
        }
        sum = next;
    }
    Err(CfError::TooFewDigits { sum, n })
}

pub fn psi(digits: &[u64], n: u64) -> Result<u64, CfError> {
    Ok(straddle(digits, n)?.psi)
}

pub fn sigma(digits: &[u64], n: u64) -> Result<u64, CfError> {
    Ok(straddle(digits, n)?.sigma)
}

/// Which side of the identity applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `x ∈ A_{n-1}`: `σ_n = V_{n-1}`.
    V,
    /// `x ∉ A_{n-1}`: `σ_n = 1 + Y_{n-1}`.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HauptlemmaOutcome {
    pub n: u64,
    pub sigma: u64,
    pub record: WaitingRecord,
    pub branch: Branch,
    pub expected: u64,
    pub pass: bool,
}

/// Check `σ_n = V_{n-1}` on `A_{n-1}` and `σ_n = 1 + Y_{n-1}` off it.
///
/// `σ_n` is read off the partial sums directly, while `V` and `Y` come from
/// the visit list. The digits must sum to at least `n + 1` so that `Y_{n-1}`
/// is determined.
pub fn hauptlemma_check(digits: &[u64], n: u64) -> Result<HauptlemmaOutcome, CfError> {
    if n < 1 {
        return Err(CfError::Horizon);
    }
    let s = straddle(digits, n)?;
    let visits = visits_from_digits(digits)?;
    let record = waiting_record(&visits, n - 1)?;
    let (branch, expected) = if record.in_a_n {
        (Branch::V, record.v)
    } else {
        (Branch::Y, 1 + record.y)
    };
    Ok(HauptlemmaOutcome {
        n,
        sigma: s.sigma,
        record,
        branch,
        expected,
        pass: s.sigma == expected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTail {
    pub n: u64,
    pub x: f64,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// 95% Wilson interval for the frequency.
    pub ci: (f64, f64),
    /// `H(x) / log(n + 2)`.
    pub reference: f64,
    /// `p̂ log(n + 2) / H(x)`.
    pub ratio: f64,
    /// `x >= 1`, outside the range where the asymptotic is stated.
    pub beyond_hypothesis: bool,
}

/// Frequency of `{σ_n > x n}` among the given straddling digits.
pub fn sigma_tail_estimate(sigmas: &[u64], n: u64, x: f64) -> Result<SigmaTail, CfError> {
    if x.is_nan() || x <= 0.0 {
        return Err(CfError::NonPositive);
    }
    let threshold = x * n as f64;
    let hits = sigmas.iter().filter(|&&s| s as f64 > threshold).count() as u64;
    Ok(sigma_tail_from_counts(hits, sigmas.len() as u64, n, x))
}

pub fn sigma_tail_from_counts(hits: u64, samples: u64, n: u64, x: f64) -> SigmaTail {
    let p_hat = hits as f64 / samples.max(1) as f64;
    let log_w = (n as f64 + 2.0).ln();
    let h = ld_rate_h(x);
    SigmaTail {
        n,
        x,
        samples,
        hits,
        p_hat,
        ci: wilson_interval(hits, samples),
        reference: h / log_w,
        ratio: p_hat * log_w / h,
        beyond_hypothesis: x >= 1.0,
    }
}
