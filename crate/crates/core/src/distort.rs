//! Distorted waiting-time processes.
//!
//! With `F(n) = W_n` and `G(n) = W_n / n`:
//! `Λ_n = F(V_n)/F(n)`, `Γ_n = G(V_n)/G(n)`, `Δ_n = F(Y_n - n)/F(n)` and
//! `Θ_n = G(Y_n)/G(n)`.

use serde::{Deserialize, Serialize};

use crate::maps::{MapError, WanderingSequence};
use crate::processes::WaitingRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortedValues {
    pub lambda: f64,
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
}

impl DistortedValues {
    pub const CSV_HEADER: &'static str = "lambda,gamma,delta,theta";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.lambda, self.gamma, self.delta, self.theta)
    }
}

pub fn distorted(record: &WaitingRecord, w: &WanderingSequence) -> Result<DistortedValues, MapError> {
    let n = record.n;
    if n == 0 {
        return Err(MapError::Domain("distortion needs n >= 1".into()));
    }
    let wn = w.cumulative(n)?;
    let wv = w.cumulative(record.v)?;
    let wy = w.cumulative(record.y)?;
    let wd = w.cumulative(record.y - n)?;
    let (nf, vf, yf) = (n as f64, record.v as f64, record.y as f64);
    Ok(DistortedValues {
        lambda: wv / wn,
        gamma: (wv / vf) * (nf / wn),
        delta: wd / wn,
        theta: (wy / yf) * (nf / wn),
    })
}

/// The constant-free critical statistics
/// `(log V/log n, log n/log V, log(Y-n)/log n, log n/log Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalStatistics {
    pub log_v_over_log_n: f64,
    pub log_n_over_log_v: f64,
    pub log_excess_over_log_n: f64,
    pub log_n_over_log_y: f64,
}

/// Needs `n >= 2`; `log n / log V` is `+∞` when `V = 1`.
pub fn critical_statistics(record: &WaitingRecord, n: u64) -> CriticalStatistics {
    debug_assert!(n >= 2 && record.v >= 1 && record.y > n);
    let ln_n = (n as f64).ln();
    let ln_v = (record.v as f64).ln();
    CriticalStatistics {
        log_v_over_log_n: ln_v / ln_n,
        log_n_over_log_v: if record.v == 1 { f64::INFINITY } else { ln_n / ln_v },
        log_excess_over_log_n: ((record.y - n) as f64).ln() / ln_n,
        log_n_over_log_y: ln_n / (record.y as f64).ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u64, z: u64, y: u64) -> WaitingRecord {
        WaitingRecord::from_parts(n, (z > 0).then_some(z), y)
    }

    #[test]
    fn farey_example() {
        let d = distorted(&rec(4, 3, 5), &WanderingSequence::Farey).unwrap();
        let (l4, l6, l3, l7) = (4f64.ln(), 6f64.ln(), 3f64.ln(), 7f64.ln());
        assert!((d.lambda - l4 / l6).abs() < 1e-15);
        assert!((d.gamma - (l4 / 2.0) * (4.0 / l6)).abs() < 1e-15);
        assert!((d.delta - l3 / l6).abs() < 1e-15);
        assert!((d.theta - (l7 / 5.0) * (4.0 / l6)).abs() < 1e-15);
    }

    #[test]
    fn trivial_cases() {
        let w = WanderingSequence::Farey;
        let r = WaitingRecord {
            n: 10,
            z: 10,
            y: 20,
            v: 10,
            in_a_n: true,
        };
        assert_eq!(distorted(&r, &w).unwrap().lambda, 1.0);
        let c = WanderingSequence::Constant { mass: 0.3 };
        let d = distorted(&rec(9, 5, 12), &c).unwrap();
        assert!((d.lambda - 8.0 / 10.0).abs() < 1e-15);
        assert!(distorted(&rec(0, 0, 1), &w).is_err());
        let t = WanderingSequence::table(vec![1.0; 5]);
        assert!(distorted(&rec(3, 2, 9), &t).is_err());
    }

    #[test]
    fn critical_examples() {
        let r = WaitingRecord {
            n: 100,
            z: 95,
            y: 101,
            v: 6,
            in_a_n: true,
        };
        let c = critical_statistics(&r, 100);
        assert_eq!(c.log_excess_over_log_n, 0.0);
        let r = WaitingRecord { v: 10, ..r };
        assert!((critical_statistics(&r, 100).log_v_over_log_n - 0.5).abs() < 1e-15);
        let r = WaitingRecord {
            n: 10_000,
            z: 0,
            y: 1_000_000,
            v: 1_000_000,
            in_a_n: false,
        };
        assert!((critical_statistics(&r, 10_000).log_v_over_log_n - 1.5).abs() < 1e-15);
        let r = WaitingRecord {
            v: 1,
            z: 99,
            y: 100,
            n: 99,
            in_a_n: true,
        };
        assert_eq!(critical_statistics(&r, 99).log_n_over_log_v, f64::INFINITY);
    }
}
