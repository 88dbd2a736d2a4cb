//! Empirical distribution functions, Kolmogorov–Smirnov distances, binomial
//! intervals and large-deviation ratio estimates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::{ld_rate_h, ld_rate_joint, LimitError, LimitLaw};
use crate::processes::WaitingRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empirical distribution needs at least one sample")]
    Empty,
    #[error("sample contains NaN")]
    NaN,
    #[error("reference probability {0} exceeds 1 at this horizon")]
    ReferenceAboveOne(f64),
    #[error("x must be positive")]
    NonPositive,
    #[error(transparent)]
    Limit(#[from] LimitError),
}

/// Sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::NaN);
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// `sup_x |F̂(x) - F(x)|` for a continuous `F`, checking both one-sided
    /// limits of `F̂` at every distinct sample value.
    pub fn ks_distance_by<F>(&self, mut cdf: F) -> Result<f64, StatsError>
    where
        F: FnMut(f64) -> Result<f64, StatsError>,
    {
        let n = self.len() as f64;
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let mut j = i;
            while j < self.values.len() && self.values[j] == v {
                j += 1;
            }
            let f = cdf(v)?;
            let below = i as f64 / n;
            let at = j as f64 / n;
            worst = worst.max((f - below).abs()).max((at - f).abs());
            i = j;
        }
        Ok(worst)
    }
}

pub fn ks_distance(ecdf: &Ecdf, law: &LimitLaw) -> Result<f64, StatsError> {
    ecdf.ks_distance_by(|x| Ok(law.cdf(x)?))
}

/// DKW half-width `√(ln(2/δ) / (2N))`.
pub fn dkw_epsilon(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// 95% Wilson score interval for `hits` successes in `n` trials.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Frequency of a rare event against a `rate / W_n` asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdEstimate {
    pub n: u64,
    pub x: f64,
    pub y: Option<f64>,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci: (f64, f64),
    /// `rate / W_n`.
    pub reference: f64,
    /// `p̂ W_n / rate`, close to 1 when the asymptote is reached.
    pub ratio: f64,
}

impl LdEstimate {
    fn build(n: u64, x: f64, y: Option<f64>, hits: u64, samples: u64, rate: f64, w_n: f64) -> Result<Self, StatsError> {
        let reference = rate / w_n;
        if reference > 1.0 {
            return Err(StatsError::ReferenceAboveOne(reference));
        }
        let p_hat = hits as f64 / samples.max(1) as f64;
        Ok(Self {
            n,
            x,
            y,
            samples,
            hits,
            p_hat,
            ci: wilson_interval(hits, samples),
            reference,
            ratio: p_hat * w_n / rate,
        })
    }

    /// `{V_n > x n}` against `H(x) / W_n`.
    pub fn v_process(n: u64, x: f64, hits: u64, samples: u64, w_n: f64) -> Result<Self, StatsError> {
        if x.is_nan() || x <= 0.0 {
            return Err(StatsError::NonPositive);
        }
        Self::build(n, x, None, hits, samples, ld_rate_h(x), w_n)
    }

    /// `{(n - Z_n)/n >= x, (Y_n - n)/n > y}` against `log((1+y)/(x+y)) / W_n`.
    pub fn joint(n: u64, x: f64, y: f64, hits: u64, samples: u64, w_n: f64) -> Result<Self, StatsError> {
        let rate = ld_rate_joint(x, y)?;
        Self::build(n, x, Some(y), hits, samples, rate, w_n)
    }
}

/// Whether a record falls in `{V_n > x n}`.
#[inline]
pub fn v_event(record: &WaitingRecord, x: f64) -> bool {
    record.v as f64 > x * record.n as f64
}

/// Whether a record falls in `{n - Z_n >= x n, Y_n - n > y n}`.
#[inline]
pub fn joint_event(record: &WaitingRecord, x: f64, y: f64) -> bool {
    let n = record.n as f64;
    (record.n - record.z) as f64 >= x * n && (record.y - record.n) as f64 > y * n
}

/// `{V_n > x n}` frequency over Farey records, with `W_n = log(n + 2)`.
pub fn ld_v_process(records: &[WaitingRecord], n: u64, x: f64) -> Result<LdEstimate, StatsError> {
    let hits = records.iter().filter(|r| v_event(r, x)).count() as u64;
    LdEstimate::v_process(n, x, hits, records.len() as u64, (n as f64 + 2.0).ln())
}

/// Joint-event frequency over Farey records, with `W_n = log(n + 2)`.
pub fn ld_joint(records: &[WaitingRecord], n: u64, x: f64, y: f64) -> Result<LdEstimate, StatsError> {
    let hits = records.iter().filter(|r| joint_event(r, x, y)).count() as u64;
    LdEstimate::joint(n, x, y, hits, records.len() as u64, (n as f64 + 2.0).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::LawKind;
    use crate::sampling::sample_rng;
    use rand::Rng;

    #[test]
    fn ks_examples() {
        let u = LimitLaw::uniform();
        let e = Ecdf::new(vec![0.9, 0.1, 0.5]).unwrap();
        assert!((ks_distance(&e, &u).unwrap() - 7.0 / 30.0).abs() < 1e-15);
        let e = Ecdf::new(vec![0.5]).unwrap();
        assert_eq!(ks_distance(&e, &u).unwrap(), 0.5);
        let n = 1000;
        let q: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let e = Ecdf::new(q).unwrap();
        assert!(ks_distance(&e, &u).unwrap() <= 0.5 / n as f64 + 1e-12);
        assert_eq!(Ecdf::new(vec![]), Err(StatsError::Empty));
        assert_eq!(Ecdf::new(vec![f64::NAN]), Err(StatsError::NaN));
    }

    #[test]
    fn ks_with_ties() {
        // Two atoms at 0.5 against U: gaps |0 - 0.5| and |1 - 0.5|.
        let e = Ecdf::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(ks_distance(&e, &LimitLaw::uniform()).unwrap(), 0.5);
        let e = Ecdf::new(vec![0.2, 0.2, 0.2, 0.9]).unwrap();
        assert!((ks_distance(&e, &LimitLaw::uniform()).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn quantile_sample_of_a_limit_law() {
        // θ_{1/2} quantiles: x = sin(π u / 2).
        let law = LimitLaw::new(LawKind::Theta, 0.5).unwrap();
        let n = 500;
        let q: Vec<f64> = (1..=n)
            .map(|i| ((i as f64 - 0.5) / n as f64 * std::f64::consts::FRAC_PI_2).sin())
            .collect();
        let d = ks_distance(&Ecdf::new(q).unwrap(), &law).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-9);
    }

    #[test]
    fn dkw_examples() {
        assert!((dkw_epsilon(50_000, 0.01) - 0.00728).abs() < 1e-5);
        assert!((dkw_epsilon(1, 2.0 / 1f64.exp().powi(2)) - 1.0).abs() < 1e-12);
        assert!(dkw_epsilon(1 << 40, 0.01) < 1e-5);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 20);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.1 && hi < 0.2);
    }

    #[test]
    fn uniform_samples_stay_in_the_dkw_band() {
        // Coverage is about 99% at this N, so 200 runs would land on either
        // side of 198 by chance; 2000 runs give a stable count.
        let eps = dkw_epsilon(2000, 0.01);
        let mut inside = 0;
        for rep in 0..2000 {
            let mut rng = sample_rng(5, 0, rep);
            let v: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
            if ks_distance(&Ecdf::new(v).unwrap(), &LimitLaw::uniform()).unwrap() <= eps {
                inside += 1;
            }
        }
        assert!(inside >= 1970, "{inside}");
    }

    #[test]
    fn ld_references() {
        let n = 1_000_000;
        let e = LdEstimate::v_process(n, 0.5, 0, 1, (n as f64 + 2.0).ln()).unwrap();
        assert!((e.reference - 0.1225).abs() < 1e-4);
        let e = LdEstimate::v_process(n, 2.0, 0, 1, (n as f64 + 2.0).ln()).unwrap();
        assert!((e.reference - 0.0362).abs() < 1e-4);
        let e = LdEstimate::joint(n, 0.5, 0.5, 0, 1, (n as f64 + 2.0).ln()).unwrap();
        assert!((e.reference - 0.0293).abs() < 1e-4);
        assert!(LdEstimate::v_process(3, 0.01, 0, 1, 5f64.ln()).is_err());
        assert!(LdEstimate::joint(n, 0.0, 0.0, 0, 1, 1.0).is_err());
    }

    #[test]
    fn events() {
        let r = WaitingRecord {
            n: 10,
            z: 4,
            y: 16,
            v: 12,
            in_a_n: true,
        };
        assert!(v_event(&r, 1.0) && !v_event(&r, 1.2));
        assert!(joint_event(&r, 0.5, 0.5) && !joint_event(&r, 0.7, 0.5) && !joint_event(&r, 0.5, 0.6));
    }
}
