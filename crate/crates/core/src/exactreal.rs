//! Exact continued-fraction digit streams.
//!
//! A [`DigitStream`] emits the digits κ_1, κ_2, … of a point of (0, 1]. The
//! point is given either explicitly (a finite digit list, a preperiod and
//! period, a rational) or as a uniformly random real that is only known
//! through a dyadic interval. The random case is refined lazily: bits from a
//! seeded generator are appended until every point of the interval shares the
//! next digit, and the interval is then pushed forward by the Gauss map in
//! exact integer arithmetic.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default cap on the number of random bits a lazy sample may consume.
pub const DEFAULT_BIT_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigitError {
    #[error("digit stream terminated (rational point reached exactly)")]
    Terminated,
    #[error("precision budget of {cap} bits exceeded")]
    PrecisionBudget { cap: u64 },
    #[error("digit does not fit in 64 bits")]
    Overflow,
    #[error("invalid digit description: {0}")]
    Invalid(String),
}

/// Anything that yields continued-fraction digits one at a time.
pub trait Digits {
    /// Next digit (always ≥ 1), or an error once the stream cannot continue.
    fn next_digit(&mut self) -> Result<u64, DigitError>;
}

/// Deterministic stream of random bits, consumed most significant bit first.
///
/// The n-th bit depends only on the seed, never on how the bits were
/// requested.
#[derive(Debug, Clone)]
pub struct BitSource {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
    used: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            word: 0,
            left: 0,
            used: 0,
        }
    }

    pub fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.used += 1;
        (self.word >> self.left) & 1 == 1
    }

    pub fn bits_used(&self) -> u64 {
        self.used
    }
}

/// The interval `[a / 2^B, (a + 1) / 2^B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    numerator: BigUint,
    bits: u64,
}

impl DyadicInterval {
    pub fn new(numerator: BigUint, bits: u64) -> Result<Self, DigitError> {
        if bits == 0 {
            return Err(DigitError::Invalid("dyadic interval needs at least one bit".into()));
        }
        if numerator >= (BigUint::one() << bits) {
            return Err(DigitError::Invalid("dyadic numerator out of range".into()));
        }
        Ok(Self { numerator, bits })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Keep the lower (`bit = false`) or upper half.
    pub fn refine(&mut self, bit: bool) {
        self.numerator <<= 1u32;
        if bit {
            self.numerator += 1u32;
        }
        self.bits += 1;
    }

    /// Lower endpoint as a homogeneous pair `(a, 2^B)`.
    pub fn lower(&self) -> (BigUint, BigUint) {
        (self.numerator.clone(), BigUint::one() << self.bits)
    }

    /// Upper endpoint as a homogeneous pair `(a + 1, 2^B)`.
    pub fn upper(&self) -> (BigUint, BigUint) {
        (&self.numerator + 1u32, BigUint::one() << self.bits)
    }
}

/// A point of [0, 1] in homogeneous coordinates `num / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Homog {
    pub num: BigUint,
    pub den: BigUint,
}

impl Homog {
    pub fn from_pair((num, den): (BigUint, BigUint)) -> Self {
        Self { num, den }
    }

    fn sum(&self, other: &Homog) -> Homog {
        Homog {
            num: &self.num + &other.num,
            den: &self.den + &other.den,
        }
    }

    fn doubled(&self) -> Homog {
        Homog {
            num: &self.num << 1u32,
            den: &self.den << 1u32,
        }
    }

    fn trailing_zeros(&self) -> u64 {
        let tz = |v: &BigUint| v.trailing_zeros().unwrap_or(u64::MAX);
        tz(&self.num).min(tz(&self.den))
    }

    fn shr(&mut self, k: u64) {
        self.num >>= k;
        self.den >>= k;
    }
}

/// Image under the current map of a lazily sampled uniform point.
///
/// `left` and `right` are the images of the two endpoints of the underlying
/// dyadic interval. They are scaled consistently, so the image of the dyadic
/// midpoint is always `left + right`.
#[derive(Debug, Clone)]
pub(crate) struct LazyPoint {
    pub bits: BitSource,
    pub interval: DyadicInterval,
    pub left: Homog,
    pub right: Homog,
    pub cap: u64,
}

impl LazyPoint {
    pub fn new(seed: u64, cap: u64) -> Self {
        let mut bits = BitSource::new(seed);
        let first = bits.next_bit();
        let interval = DyadicInterval::new(BigUint::from(first as u8), 1).expect("one-bit interval");
        let left = Homog::from_pair(interval.lower());
        let right = Homog::from_pair(interval.upper());
        Self {
            bits,
            interval,
            left,
            right,
            cap,
        }
    }

    /// Halve the underlying dyadic interval using the next random bit.
    pub fn refine(&mut self) -> Result<(), DigitError> {
        if self.interval.bits() >= self.cap {
            return Err(DigitError::PrecisionBudget { cap: self.cap });
        }
        let bit = self.bits.next_bit();
        self.interval.refine(bit);
        let mid = self.left.sum(&self.right);
        if bit {
            self.left = mid;
            self.right = self.right.doubled();
        } else {
            self.right = mid;
            self.left = self.left.doubled();
        }
        let common = self.left.trailing_zeros().min(self.right.trailing_zeros());
        if common > 0 && common != u64::MAX {
            self.left.shr(common);
            self.right.shr(common);
        }
        Ok(())
    }

    /// Apply the same integer Möbius map to both endpoints.
    pub fn map_both(&mut self, f: impl Fn(&Homog) -> Homog) {
        self.left = f(&self.left);
        self.right = f(&self.right);
    }
}

fn gauss_digit(point: &Homog) -> Option<BigUint> {
    if point.num.is_zero() {
        None
    } else {
        Some(&point.den / &point.num)
    }
}

#[derive(Debug, Clone)]
enum Source {
    Explicit { digits: Vec<u64>, pos: usize },
    Periodic { preperiod: Vec<u64>, period: Vec<u64>, pos: usize },
    Rational { num: BigUint, den: BigUint },
    Dyadic(Box<LazyPoint>),
}

/// A stream of continued-fraction digits.
#[derive(Debug, Clone)]
pub struct DigitStream {
    source: Source,
    emitted: Vec<u64>,
    terminated: bool,
}

fn check_digits(digits: &[u64]) -> Result<(), DigitError> {
    if digits.contains(&0) {
        return Err(DigitError::Invalid("digits must be at least 1".into()));
    }
    Ok(())
}

impl DigitStream {
    /// A finite digit list; the stream terminates after the last digit.
    pub fn explicit(digits: Vec<u64>) -> Result<Self, DigitError> {
        check_digits(&digits)?;
        Ok(Self::with_source(Source::Explicit { digits, pos: 0 }))
    }

    /// `preperiod` followed by `period` repeated forever.
    pub fn periodic(preperiod: Vec<u64>, period: Vec<u64>) -> Result<Self, DigitError> {
        check_digits(&preperiod)?;
        check_digits(&period)?;
        if period.is_empty() {
            return Err(DigitError::Invalid("period must be nonempty".into()));
        }
        Ok(Self::with_source(Source::Periodic { preperiod, period, pos: 0 }))
    }

    /// Digits of the rational `num / den` in (0, 1] by the Euclidean algorithm.
    pub fn rational(num: BigUint, den: BigUint) -> Result<Self, DigitError> {
        if den.is_zero() || num > den {
            return Err(DigitError::Invalid("rational must lie in [0, 1]".into()));
        }
        let mut stream = Self::with_source(Source::Rational { num, den });
        if let Source::Rational { num, .. } = &stream.source {
            stream.terminated = num.is_zero();
        }
        Ok(stream)
    }

    /// A uniformly distributed random point, refined lazily from `seed`.
    pub fn lazy_dyadic(seed: u64, bit_cap: u64) -> Self {
        Self::with_source(Source::Dyadic(Box::new(LazyPoint::new(seed, bit_cap))))
    }

    fn with_source(source: Source) -> Self {
        Self {
            source,
            emitted: Vec::new(),
            terminated: false,
        }
    }

    pub fn emitted(&self) -> &[u64] {
        &self.emitted
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Current dyadic interval of a lazy sample.
    pub fn dyadic_interval(&self) -> Option<&DyadicInterval> {
        match &self.source {
            Source::Dyadic(p) => Some(&p.interval),
            _ => None,
        }
    }

    fn produce(&mut self) -> Result<u64, DigitError> {
        match &mut self.source {
            Source::Explicit { digits, pos } => {
                let d = digits.get(*pos).copied().ok_or(DigitError::Terminated)?;
                *pos += 1;
                Ok(d)
            }
            Source::Periodic { preperiod, period, pos } => {
                let d = if *pos < preperiod.len() {
                    preperiod[*pos]
                } else {
                    period[(*pos - preperiod.len()) % period.len()]
                };
                *pos += 1;
                Ok(d)
            }
            Source::Rational { num, den } => {
                if num.is_zero() {
                    return Err(DigitError::Terminated);
                }
                let (q, r) = den.div_rem(num);
                *den = std::mem::replace(num, r);
                q.to_u64().ok_or(DigitError::Overflow)
            }
            Source::Dyadic(point) => loop {
                if let (Some(a), Some(b)) = (gauss_digit(&point.left), gauss_digit(&point.right)) {
                    if a == b {
                        let q = a;
                        point.map_both(|h| Homog {
                            num: &h.den - &q * &h.num,
                            den: h.num.clone(),
                        });
                        return q.to_u64().ok_or(DigitError::Overflow);
                    }
                }
                point.refine()?;
            },
        }
    }
}

impl Digits for DigitStream {
    fn next_digit(&mut self) -> Result<u64, DigitError> {
        if self.terminated {
            return Err(DigitError::Terminated);
        }
        match self.produce() {
            Ok(d) => {
                self.emitted.push(d);
                if let Source::Rational { num, .. } = &self.source {
                    self.terminated = num.is_zero();
                }
                Ok(d)
            }
            Err(DigitError::Terminated) => {
                self.terminated = true;
                Err(DigitError::Terminated)
            }
            Err(e) => Err(e),
        }
    }
}

/// Pull digits until their sum exceeds `n`.
///
/// The returned list satisfies `sum(all) > n` and `sum(all but last) <= n`.
pub fn digits_until_sum_exceeds<D: Digits + ?Sized>(stream: &mut D, n: u64) -> Result<Vec<u64>, DigitError> {
    let mut out = Vec::new();
    let mut sum: u64 = 0;
    while sum <= n {
        let d = stream.next_digit()?;
        out.push(d);
        sum = sum.saturating_add(d);
    }
    Ok(out)
}

/// Continued-fraction digits of `p / q` for machine integers, `0 < p <= q`.
pub fn rational_digits<T: Integer + Copy>(mut p: T, mut q: T) -> Vec<T> {
    let mut out = Vec::new();
    while !p.is_zero() {
        let (d, r) = q.div_rem(&p);
        out.push(d);
        q = p;
        p = r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;

    fn take(stream: &mut DigitStream, k: usize) -> Vec<u64> {
        (0..k).map(|_| stream.next_digit().unwrap()).collect()
    }

    /// Convergents p_k / q_k of a digit prefix, as exact rationals.
    fn convergents(digits: &[u64]) -> Vec<BigRational> {
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
        let mut out = Vec::new();
        for &d in digits {
            let d = BigInt::from(d);
            let p2 = &d * &p1 + &p0;
            let q2 = &d * &q1 + &q0;
            out.push(BigRational::new(p2.clone(), q2.clone()));
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
        }
        out
    }

    #[test]
    fn periodic_two_is_sqrt2_minus_one() {
        let mut s = DigitStream::periodic(vec![], vec![2]).unwrap();
        let digits = take(&mut s, 30);
        assert!(digits.iter().all(|&d| d == 2));
        // x = 1/(2+x) <=> x^2 + 2x - 1 = 0; consecutive convergents bracket the root.
        let poly = |r: &BigRational| r * r + r * BigRational::from_integer(2.into()) - BigRational::one();
        let conv = convergents(&digits);
        for w in conv.windows(2) {
            assert!((poly(&w[0]) * poly(&w[1])).is_negative());
        }
        let last = conv.last().unwrap().to_f64().unwrap();
        assert!((last - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn periodic_one_is_golden_ratio_conjugate() {
        let mut s = DigitStream::periodic(vec![], vec![1]).unwrap();
        let digits = take(&mut s, 40);
        assert!(digits.iter().all(|&d| d == 1));
        let poly = |r: &BigRational| r * r + r - BigRational::one();
        let conv = convergents(&digits);
        for w in conv.windows(2) {
            assert!((poly(&w[0]) * poly(&w[1])).is_negative());
        }
    }

    #[test]
    fn rational_two_fifths() {
        let mut s = DigitStream::rational(2u32.into(), 5u32.into()).unwrap();
        assert_eq!(s.next_digit(), Ok(2));
        assert_eq!(s.next_digit(), Ok(2));
        assert!(s.is_terminated());
        assert_eq!(s.next_digit(), Err(DigitError::Terminated));
        assert_eq!(rational_digits(2u64, 5), vec![2, 2]);
        // 355 = 3*113 + 16, 113 = 7*16 + 1, 16 = 16*1.
        assert_eq!(rational_digits(113u64, 355), vec![3, 7, 16]);
        assert_eq!(rational_digits(1u64, 1), vec![1]);
    }

    #[test]
    fn explicit_and_sum_control() {
        let mut s = DigitStream::periodic(vec![], vec![2]).unwrap();
        assert_eq!(digits_until_sum_exceeds(&mut s, 4).unwrap(), vec![2, 2, 2]);
        let mut s = DigitStream::periodic(vec![], vec![1]).unwrap();
        assert_eq!(digits_until_sum_exceeds(&mut s, 0).unwrap(), vec![1]);
        let mut s = DigitStream::explicit(vec![5, 1]).unwrap();
        assert_eq!(digits_until_sum_exceeds(&mut s, 3).unwrap(), vec![5]);
        let mut s = DigitStream::explicit(vec![1, 1]).unwrap();
        assert_eq!(digits_until_sum_exceeds(&mut s, 5), Err(DigitError::Terminated));
        assert!(DigitStream::explicit(vec![1, 0]).is_err());
        assert!(DigitStream::periodic(vec![1], vec![]).is_err());
    }

    #[test]
    fn lazy_sample_is_deterministic_and_order_independent() {
        let mut a = DigitStream::lazy_dyadic(7, DEFAULT_BIT_CAP);
        let mut b = DigitStream::lazy_dyadic(7, DEFAULT_BIT_CAP);
        let one_go = take(&mut a, 60);
        let mut piecewise = Vec::new();
        for chunk in [1usize, 5, 2, 30, 22] {
            piecewise.extend(take(&mut b, chunk));
        }
        assert_eq!(one_go, piecewise);
        let mut c = DigitStream::lazy_dyadic(8, DEFAULT_BIT_CAP);
        assert_ne!(one_go, take(&mut c, 60));
    }

    #[test]
    fn lazy_interval_lies_in_emitted_cylinder() {
        for seed in 0..50 {
            let mut s = DigitStream::lazy_dyadic(seed, DEFAULT_BIT_CAP);
            let digits = take(&mut s, 25);
            let iv = s.dyadic_interval().unwrap();
            let den = BigInt::one() << iv.bits();
            let lo = BigRational::new(BigInt::from(iv.numerator().clone()), den.clone());
            let hi = BigRational::new(BigInt::from(iv.numerator().clone()) + 1, den);
            // Cylinder of the prefix: between p_k/q_k and (p_k+p_{k-1})/(q_k+q_{k-1}).
            let conv = convergents(&digits);
            let k = conv.len();
            let (pk, qk) = (conv[k - 1].numer().clone(), conv[k - 1].denom().clone());
            let (pk1, qk1) = (conv[k - 2].numer().clone(), conv[k - 2].denom().clone());
            let a = BigRational::new(pk.clone(), qk.clone());
            let b = BigRational::new(pk + pk1, qk + qk1);
            let (c_lo, c_hi) = if a < b { (a, b) } else { (b, a) };
            assert!(c_lo <= lo && hi <= c_hi, "seed {seed}");
        }
    }

    #[test]
    fn bit_cap_is_reported() {
        let mut s = DigitStream::lazy_dyadic(3, 8);
        let err = (0..100).map(|_| s.next_digit()).find_map(|r| r.err());
        assert_eq!(err, Some(DigitError::PrecisionBudget { cap: 8 }));
    }

    #[test]
    fn first_digit_law_under_lebesgue() {
        // P(kappa_1 = j) = 1/j - 1/(j+1).
        let n = 20_000;
        let mut counts = [0usize; 4];
        for seed in 0..n {
            let d = DigitStream::lazy_dyadic(seed, DEFAULT_BIT_CAP).next_digit().unwrap();
            if d <= 3 {
                counts[d as usize] += 1;
            }
        }
        for (j, &count) in counts.iter().enumerate().skip(1) {
            let p = 1.0 / j as f64 - 1.0 / (j + 1) as f64;
            let freq = count as f64 / n as f64;
            assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "j={j}");
        }
    }
}
