//! The Thaler α = 0 orbit at configurable binary precision.
//!
//! Same scheme as [`super::thaler`]: the orbit is carried with a bound on the
//! distance to the true orbit, and membership in `A` is decided only when the
//! bound keeps the point clear of `a`. Arithmetic is correctly rounded, so
//! one step of `p`-bit arithmetic is off by at most a few units of `2^{-p}`.
//!
//! Chaotic stretches between laminar phases expand errors by roughly two
//! bits per step, so an orbit that outlives double-double certification is
//! retried here with more bits, see [`waiting_with_ladder`].

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use super::thaler::{censored_waiting, CertifiedOrbit, ThalerOrbit, ThalerWaiting};
use super::ProcessError;
use crate::ddouble::DoubleDouble;

const RM: RoundingMode = RoundingMode::ToEven;
const SLACK: f64 = 1.0 + 1e-12;
/// Relative accuracy of the `f64` shadows of big values.
const SHADOW: f64 = 1.0 + 1e-15;

/// Nearest `f64` to a finite `BigFloat` (relative error about `2^{-53}`).
pub fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, exponent, _)) => {
            let top = words.last().copied().unwrap_or(0);
            if top == 0 {
                return 0.0;
            }
            let next = if words.len() >= 2 { words[words.len() - 2] } else { 0 };
            let m = top as f64 * 2f64.powi(-64) + next as f64 * 2f64.powi(-128);
            // exponent can be far below f64 range; two steps avoid overflow
            // of powi on the way.
            let half = exponent / 2;
            let v = m * 2f64.powi(half) * 2f64.powi(exponent - half);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

fn from_dd(x: DoubleDouble, p: usize) -> BigFloat {
    BigFloat::from_f64(x.hi, p).add(&BigFloat::from_f64(x.lo, p), p, RM)
}

/// Constants of the map at one working precision.
#[derive(Debug)]
pub struct ThalerPrecision {
    bits: usize,
    a: BigFloat,
    inv_one_minus_a: BigFloat,
    /// Bound on `|a_stored - a|`.
    a_err: f64,
    /// Bound on the rounding error of one step, relative to the result.
    step_eps: f64,
    expand: f64,
}

impl ThalerPrecision {
    /// Constants for `bits`-bit arithmetic (rounded up to whole words).
    pub fn new(bits: usize) -> Result<Self, ProcessError> {
        let p = bits.max(128);
        let w = p + 64;
        let mut cc = Consts::new().map_err(|_| ProcessError::PrecisionDegraded { time: 0 })?;
        let one = BigFloat::from_word(1, w);
        let two = BigFloat::from_word(2, w);
        // Newton on g(a) = a + a² e^{-1/a} - 1, where g' = 1 + (2a + 1) e^{-1/a} >= 1.
        let mut a = BigFloat::from_f64(crate::maps::thaler_boundary(), w);
        let g = |a: &BigFloat, cc: &mut Consts| {
            let e = a.reciprocal(w, RM).neg().exp(w, RM, cc);
            let value = a.add(&a.mul(a, w, RM).mul(&e, w, RM), w, RM).sub(&one, w, RM);
            let slope = one.add(&two.mul(a, w, RM).add(&one, w, RM).mul(&e, w, RM), w, RM);
            (value, slope)
        };
        for _ in 0..64 {
            let (value, slope) = g(&a, &mut cc);
            let delta = value.div(&slope, w, RM);
            a = a.sub(&delta, w, RM);
            if delta.is_zero() || to_f64(&delta).abs() < 2f64.powi(-(w as i32) + 8) {
                break;
            }
        }
        let (residual, _) = g(&a, &mut cc);
        // |a - root| <= |g(a)| / min g' <= |g(a)|, plus rounding to p bits.
        let mut stored = a.clone();
        stored
            .set_precision(p, RM)
            .map_err(|_| ProcessError::PrecisionDegraded { time: 0 })?;
        let a_err = 2.0 * to_f64(&residual).abs() + 2f64.powi(-(p as i32) + 1);
        let one_p = BigFloat::from_word(1, p);
        let inv = one_p.div(&one_p.sub(&stored, p, RM), p, RM);
        let expand = to_f64(&inv) * SHADOW;
        Ok(Self {
            bits: p,
            a: stored,
            inv_one_minus_a: inv,
            a_err,
            step_eps: 2f64.powi(-(p as i32) + 5),
            expand,
        })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// The stored branch point, rounded to `f64`.
    pub fn a_f64(&self) -> f64 {
        to_f64(&self.a)
    }

    pub fn a_error(&self) -> f64 {
        self.a_err
    }
}

/// Orbit carried at the precision of a [`ThalerPrecision`].
pub struct MpThalerOrbit<'c> {
    c: &'c ThalerPrecision,
    cc: Consts,
    x: BigFloat,
    err: f64,
    time: u64,
}

impl<'c> MpThalerOrbit<'c> {
    pub fn new(c: &'c ThalerPrecision, x0: DoubleDouble) -> Result<Self, ProcessError> {
        Ok(Self {
            c,
            cc: Consts::new().map_err(|_| ProcessError::PrecisionDegraded { time: 0 })?,
            x: from_dd(x0, c.bits),
            err: 0.0,
            time: 0,
        })
    }

    pub fn point_f64(&self) -> f64 {
        to_f64(&self.x)
    }

    pub fn error_bound(&self) -> f64 {
        self.err
    }

    /// `Some(true)` right of `a`, `Some(false)` left, `None` if undecided.
    fn side(&self) -> Option<bool> {
        let gap = to_f64(&self.x.sub(&self.c.a, self.c.bits, RM));
        let margin = (self.err + self.c.a_err) * SHADOW;
        if gap.abs() / SHADOW <= margin {
            None
        } else {
            Some(gap > 0.0)
        }
    }
}

impl CertifiedOrbit for MpThalerOrbit<'_> {
    fn time(&self) -> u64 {
        self.time
    }

    fn in_a(&self) -> Result<bool, ProcessError> {
        self.side().ok_or(ProcessError::PrecisionDegraded { time: self.time })
    }

    fn escape_lower_bound(&self) -> f64 {
        let x = self.point_f64() * SHADOW + self.err;
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let a = crate::maps::thaler_boundary();
        ((1.0 / x).exp() - (1.0 / a).exp()) / SLACK - 1.0
    }

    fn step(&mut self) -> Result<(), ProcessError> {
        let p = self.c.bits;
        match self.side() {
            None => return Err(ProcessError::PrecisionDegraded { time: self.time }),
            Some(false) => {
                let xf = self.point_f64();
                if self.x.is_zero() || xf <= 0.0 {
                    self.x = BigFloat::from_word(0, p);
                } else {
                    let e = self.x.reciprocal(p, RM).neg().exp(p, RM, &mut self.cc);
                    self.x = self.x.add(&self.x.mul(&self.x, p, RM).mul(&e, p, RM), p, RM);
                }
                let xe = xf * SHADOW + self.err;
                let deriv = 1.0 + (2.0 * xe + 1.0) * (-1.0 / xe).exp();
                self.err = deriv * self.err * SLACK + self.c.step_eps * self.point_f64().abs();
            }
            Some(true) => {
                self.x = self.x.sub(&self.c.a, p, RM).mul(&self.c.inv_one_minus_a, p, RM);
                self.err = (self.err + self.c.a_err) * self.c.expand * SLACK + self.c.step_eps * self.point_f64().abs();
            }
        }
        self.time += 1;
        Ok(())
    }
}

/// Certified waiting data of the orbit of `x0`, or `None` if every rung of the
/// ladder lost certification. Returns the precision that succeeded (106 for
/// double-double).
pub fn waiting_with_ladder(
    x0: DoubleDouble,
    n: u64,
    cap: u64,
    ladder: &[ThalerPrecision],
) -> Result<Option<(ThalerWaiting, usize)>, ProcessError> {
    match ThalerOrbit::new(x0).waiting(n, cap) {
        Ok(w) => return Ok(Some((w, 106))),
        Err(ProcessError::PrecisionDegraded { .. }) => {}
        Err(e) => return Err(e),
    }
    for rung in ladder {
        match censored_waiting(MpThalerOrbit::new(rung, x0)?, n, cap) {
            Ok(w) => return Ok(Some((w, rung.bits()))),
            Err(ProcessError::PrecisionDegraded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
