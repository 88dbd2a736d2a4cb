//! Orbit engines for the rational maps.
//!
//! [`visits_from_orbit`] iterates an exact rational point, skipping laminar
//! stretches near 0 with the closed-form escape time. [`LazyOrbit`] does the
//! same for a uniformly random point known only through a dyadic interval
//! that shares its bit source with [`crate::exactreal::DigitStream`], so a
//! seed names the same point in both engines.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use super::{visits_from_digits, ProcessError, VisitTimes};
use crate::exactreal::{rational_digits, DigitError, DigitStream, Digits, Homog, LazyPoint};
use crate::maps::{apply_rational, laminar_escape, MapError, MapKind};

fn check_rational_map(kind: MapKind) -> Result<(), ProcessError> {
    match kind {
        MapKind::Farey | MapKind::LasotaYorke => Ok(()),
        other => Err(MapError::NotRational(other).into()),
    }
}

fn to_u64<T: ToPrimitive>(k: &T) -> Result<u64, ProcessError> {
    k.to_u64().ok_or(ProcessError::Digit(DigitError::Overflow))
}

/// Visits of `A = (1/2, 1]` along the exact orbit of `x`.
///
/// Iteration stops at the first visit after `horizon`, or when the orbit is
/// absorbed at 0; in the latter case `terminated` is set and the list is
/// complete for all times.
pub fn visits_from_orbit<T>(kind: MapKind, x: &Ratio<T>, horizon: u64) -> Result<VisitTimes, ProcessError>
where
    T: Clone + Integer + ToPrimitive,
{
    check_rational_map(kind)?;
    if *x < Ratio::zero() || *x > Ratio::one() {
        return Err(MapError::Domain("rational outside [0, 1]".into()).into());
    }
    if kind == MapKind::Farey {
        return farey_visits(x.numer().clone(), x.denom().clone(), horizon);
    }
    let half = Ratio::new(T::one(), T::one() + T::one());
    let mut y = x.clone();
    let mut t: u64 = 0;
    let mut times = Vec::new();
    loop {
        if y.is_zero() {
            return Ok(VisitTimes::new(times, t, true));
        }
        if y > half {
            times.push(t);
            if t > horizon {
                return Ok(VisitTimes::new(times, t, false));
            }
            y = apply_rational(kind, &y)?;
            t += 1;
        } else {
            let (k, exit) = laminar_escape(&y)?;
            t = t.checked_add(to_u64(&k)?).ok_or(ProcessError::Digit(DigitError::Overflow))?;
            y = exit;
        }
    }
}

/// Farey orbit of the reduced fraction `p / q` on numerator and denominator.
/// Both branches keep the fraction reduced: `(q - p) / p` on the right and
/// `p / (q - k p)` after a laminar escape of `k` steps.
fn farey_visits<T>(mut p: T, mut q: T, horizon: u64) -> Result<VisitTimes, ProcessError>
where
    T: Clone + Integer + ToPrimitive,
{
    let two = T::one() + T::one();
    let mut t: u64 = 0;
    let mut times = Vec::new();
    loop {
        if p.is_zero() {
            return Ok(VisitTimes::new(times, t, true));
        }
        if two.clone() * p.clone() > q {
            times.push(t);
            if t > horizon {
                return Ok(VisitTimes::new(times, t, false));
            }
            let next = q - p.clone();
            q = std::mem::replace(&mut p, next);
            t += 1;
        } else {
            let k = (q.clone() - two.clone() * p.clone()) / p.clone() + T::one();
            t = t.checked_add(to_u64(&k)?).ok_or(ProcessError::Digit(DigitError::Overflow))?;
            q = q - k * p.clone();
        }
    }
}

/// First return time to `A` of a point `x ∈ A`.
pub fn first_return<T>(kind: MapKind, x: &Ratio<T>) -> Result<u64, ProcessError>
where
    T: Clone + Integer + ToPrimitive,
{
    check_rational_map(kind)?;
    let half = Ratio::new(T::one(), T::one() + T::one());
    if *x <= half || *x > Ratio::one() {
        return Err(ProcessError::NotInReferenceSet);
    }
    let y = apply_rational(kind, x)?;
    if y.is_zero() {
        return Err(ProcessError::OrbitTerminated { time: 1 });
    }
    if y > half {
        return Ok(1);
    }
    let (k, _) = laminar_escape(&y)?;
    Ok(1 + to_u64(&k)?)
}

/// Orbit of a lazily sampled uniform point under Farey or Lasota–Yorke.
#[derive(Debug, Clone)]
pub struct LazyOrbit {
    kind: MapKind,
    point: LazyPoint,
    time: u64,
}

enum Step {
    Right,
    Laminar(BigUint),
    Refine,
}

impl LazyOrbit {
    pub fn new(kind: MapKind, seed: u64, bit_cap: u64) -> Result<Self, ProcessError> {
        check_rational_map(kind)?;
        Ok(Self {
            kind,
            point: LazyPoint::new(seed, bit_cap),
            time: 0,
        })
    }

    pub fn bits_used(&self) -> u64 {
        self.point.interval.bits()
    }

    fn classify(&self) -> Step {
        let (l, r) = (&self.point.left, &self.point.right);
        let low = |h: &Homog| (&h.num << 1u32) <= h.den;
        let high = |h: &Homog| (&h.num << 1u32) >= h.den;
        if high(l) && high(r) {
            return Step::Right;
        }
        if low(l) && low(r) {
            // Escape time floor((d - 2n)/n) + 1 is monotone in x, so equal
            // values at both ends fix it on the whole interval.
            let escape = |h: &Homog| -> Option<BigUint> {
                if h.num.is_zero() {
                    None
                } else {
                    Some((&h.den - (&h.num << 1u32)) / &h.num + 1u32)
                }
            };
            if let (Some(a), Some(b)) = (escape(l), escape(r)) {
                if a == b {
                    return Step::Laminar(a);
                }
            }
        }
        Step::Refine
    }

    /// Advance until the first visit after `horizon`; returns all visits seen.
    pub fn visits(&mut self, horizon: u64) -> Result<VisitTimes, ProcessError> {
        let mut times = Vec::new();
        loop {
            match self.classify() {
                Step::Right => {
                    times.push(self.time);
                    let t = self.time;
                    match self.kind {
                        MapKind::Farey => self.point.map_both(|h| Homog {
                            num: &h.den - &h.num,
                            den: h.num.clone(),
                        }),
                        _ => self.point.map_both(|h| Homog {
                            num: (&h.num << 1u32) - &h.den,
                            den: h.den.clone(),
                        }),
                    }
                    self.time += 1;
                    if t > horizon {
                        return Ok(VisitTimes::new(times, t, false));
                    }
                }
                Step::Laminar(k) => {
                    self.point.map_both(|h| Homog {
                        num: h.num.clone(),
                        den: &h.den - &k * &h.num,
                    });
                    let k = k.to_u64().ok_or(ProcessError::Digit(DigitError::Overflow))?;
                    self.time = self.time.checked_add(k).ok_or(ProcessError::Digit(DigitError::Overflow))?;
                }
                Step::Refine => self.point.refine()?,
            }
        }
    }
}

/// Outcome of comparing the digit engine with the orbit engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheck {
    pub digits: VisitTimes,
    pub orbit: VisitTimes,
    /// Times up to which both lists were compared (inclusive).
    pub compared_up_to: u64,
}

fn compare(digits: VisitTimes, orbit: VisitTimes) -> Result<CrossCheck, ProcessError> {
    let limit = if orbit.terminated && digits.terminated {
        u64::MAX
    } else {
        digits.horizon.min(orbit.horizon)
    };
    let a = digits.up_to(limit);
    let b = orbit.up_to(limit);
    let len = a.len().max(b.len());
    for i in 0..len {
        if a.get(i) != b.get(i) {
            return Err(ProcessError::Mismatch {
                index: i,
                digits: a.get(i).copied(),
                orbit: b.get(i).copied(),
            });
        }
    }
    Ok(CrossCheck {
        digits,
        orbit,
        compared_up_to: limit,
    })
}

/// Compare the two Farey engines on the rational `p / q ∈ (0, 1]`.
///
/// Both sides run to termination when `n` is `u64::MAX`; otherwise the
/// orbit stops at its first visit after `n`.
pub fn cross_check(p: u64, q: u64, n: u64) -> Result<CrossCheck, ProcessError> {
    if p == 0 || p > q {
        return Err(MapError::Domain(format!("{p}/{q}")).into());
    }
    let mut from_digits = visits_from_digits(&rational_digits(p, q))?;
    // A rational's digit list is complete: the orbit is absorbed right after
    // the last visit.
    from_digits.terminated = true;
    let orbit = visits_from_orbit(MapKind::Farey, &Ratio::new(p, q), n)?;
    compare(from_digits, orbit)
}

/// Compare the lazy digit stream and the lazy orbit for the random point
/// named by `seed`, up to the first visit after `n`.
pub fn cross_check_lazy(seed: u64, n: u64, bit_cap: u64) -> Result<CrossCheck, ProcessError> {
    let mut stream = DigitStream::lazy_dyadic(seed, bit_cap);
    let mut digits = Vec::new();
    let mut sum = 0u64;
    while sum < n + 2 {
        let d = stream.next_digit()?;
        digits.push(d);
        sum = sum.saturating_add(d);
    }
    let from_digits = visits_from_digits(&digits)?;
    let orbit = LazyOrbit::new(MapKind::Farey, seed, bit_cap)?.visits(n)?;
    compare(from_digits, orbit)
}
