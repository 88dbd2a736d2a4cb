//! Floating point orbit of the Thaler α = 0 map with a certified error bound.
//!
//! The orbit is carried in double-double arithmetic together with a bound
//! `err` on the distance to the true orbit of the starting point. Membership
//! in `A = (a, 1]` is only decided when the bound keeps the point clear of
//! `a`; otherwise the sample is reported as degraded.
//!
//! Long laminar stretches are cut short by a rigorous lower bound on their
//! length. With `g(x) = x² e^{-1/x}` increasing and `Φ(x) = -e^{1/x}` an
//! antiderivative of `1/g`, each left-branch step raises `Φ` by at most 1, so
//! leaving `[0, a]` from `x` takes at least `e^{1/x} - e^{1/a}` steps.

use rand::RngCore;

use super::ProcessError;
use crate::ddouble::{DoubleDouble, DD_EPS};

/// The branch point `a`, root of `x + x² e^{-1/x} = 1`, as a double-double.
pub const THALER_A: DoubleDouble = DoubleDouble {
    hi: 0.809_489_657_968_496_5,
    lo: -1.171_573_458_664_778_3e-17,
};

/// Bound on `|THALER_A - a|`, with a wide margin.
const A_ERR: f64 = 1e-30;

/// Relative slack on floating point evaluations of derivative bounds.
const SLACK: f64 = 1.0 + 1e-12;

/// Waiting-time data of one Thaler orbit, with `V` censored at the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThalerWaiting {
    pub n: u64,
    pub z: u64,
    pub in_a_n: bool,
    /// `Some(V_n)` when `V_n <= cap`, `None` when `V_n > cap`.
    pub v: Option<u64>,
    /// Map evaluations actually performed.
    pub steps: u64,
}

impl ThalerWaiting {
    /// Whether `V_n >= threshold`; needs `threshold <= cap + 1`.
    pub fn v_at_least(&self, threshold: f64) -> bool {
        match self.v {
            Some(v) => v as f64 >= threshold,
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThalerOrbit {
    x: DoubleDouble,
    err: f64,
    time: u64,
}

enum Side {
    Left,
    Right,
}

impl ThalerOrbit {
    pub fn new(x0: DoubleDouble) -> Self {
        Self { x: x0, err: 0.0, time: 0 }
    }

    /// A uniform point of [0, 1) with 106 random bits, held exactly.
    pub fn uniform<R: RngCore>(rng: &mut R) -> Self {
        let hi = (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
        let lo = (rng.next_u64() >> 11) as f64 * 2f64.powi(-106);
        Self::new(DoubleDouble::new(hi, lo))
    }

    pub fn point(&self) -> DoubleDouble {
        self.x
    }

    pub fn error_bound(&self) -> f64 {
        self.err
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    fn side(&self) -> Result<Side, ProcessError> {
        let gap = (self.x - THALER_A).to_f64();
        let margin = self.err + A_ERR;
        if gap > margin {
            Ok(Side::Right)
        } else if gap < -margin {
            Ok(Side::Left)
        } else {
            Err(ProcessError::PrecisionDegraded { time: self.time })
        }
    }

    /// Whether the current point lies in `A`.
    pub fn in_a(&self) -> Result<bool, ProcessError> {
        Ok(matches!(self.side()?, Side::Right))
    }

    /// Lower bound on the number of steps before the orbit next enters `A`,
    /// valid while the point is in the left branch.
    pub fn escape_lower_bound(&self) -> f64 {
        let x = self.x.to_f64() + self.err;
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let a = THALER_A.hi;
        // (e^{1/x} - e^{1/a}) rounded down with a little slack.
        ((1.0 / x).exp() - (1.0 / a).exp()) / SLACK - 1.0
    }

    pub fn step(&mut self) -> Result<(), ProcessError> {
        match self.side()? {
            Side::Left => {
                let x = self.x;
                if x.hi <= 0.0 {
                    self.x = DoubleDouble::ZERO;
                } else {
                    let e = (-x.recip()).exp();
                    self.x = x + x * x * e;
                }
                let xe = x.to_f64() + self.err;
                let deriv = 1.0 + (2.0 * xe + 1.0) * (-1.0 / xe).exp();
                self.err = deriv * self.err * SLACK + DD_EPS * self.x.to_f64().abs();
            }
            Side::Right => {
                let one_minus_a = DoubleDouble::ONE - THALER_A;
                self.x = (self.x - THALER_A) / one_minus_a;
                let expand = 1.0 / one_minus_a.to_f64();
                self.err = (self.err + A_ERR) * expand * SLACK + DD_EPS * self.x.to_f64().abs();
            }
        }
        self.time += 1;
        Ok(())
    }

    /// Run from time 0 and record `Z_n` and `V_n`, censoring `V_n` at `cap`.
    pub fn waiting(self, n: u64, cap: u64) -> Result<ThalerWaiting, ProcessError> {
        censored_waiting(self, n, cap)
    }
}

impl CertifiedOrbit for ThalerOrbit {
    fn time(&self) -> u64 {
        self.time
    }

    fn in_a(&self) -> Result<bool, ProcessError> {
        ThalerOrbit::in_a(self)
    }

    fn escape_lower_bound(&self) -> f64 {
        ThalerOrbit::escape_lower_bound(self)
    }

    fn step(&mut self) -> Result<(), ProcessError> {
        ThalerOrbit::step(self)
    }
}

/// An orbit engine that only answers membership questions it can certify.
pub trait CertifiedOrbit {
    fn time(&self) -> u64;
    fn in_a(&self) -> Result<bool, ProcessError>;
    /// Lower bound on the steps before the next visit, valid outside `A`.
    fn escape_lower_bound(&self) -> f64;
    fn step(&mut self) -> Result<(), ProcessError>;
}

/// `Z_n` and `V_n` of an orbit started at time 0, with `V_n` censored at
/// `cap`.
pub fn censored_waiting<O: CertifiedOrbit>(mut orbit: O, n: u64, cap: u64) -> Result<ThalerWaiting, ProcessError> {
    debug_assert_eq!(orbit.time(), 0);
    let mut last: Option<u64> = None;
    let mut steps = 0u64;
    loop {
        let t = orbit.time();
        let visit = orbit.in_a()?;
        if visit && t > n {
            let z = last.unwrap_or(0);
            let v = t - z;
            return Ok(ThalerWaiting {
                n,
                z,
                in_a_n: last.is_some(),
                v: (v <= cap).then_some(v),
                steps,
            });
        }
        if visit {
            last = Some(t);
        }
        let z = last.unwrap_or(0);
        let deadline = z.saturating_add(cap);
        let censored = ThalerWaiting {
            n,
            z,
            in_a_n: last.is_some(),
            v: None,
            steps,
        };
        if t >= deadline && t >= n {
            return Ok(censored);
        }
        if !visit {
            // The next visit comes at time >= t + bound; once that is past
            // n, Z is final and the cap decides.
            let next_min = t as f64 + orbit.escape_lower_bound();
            if next_min > n as f64 && next_min > deadline as f64 {
                return Ok(censored);
            }
        }
        orbit.step()?;
        steps += 1;
    }
}
