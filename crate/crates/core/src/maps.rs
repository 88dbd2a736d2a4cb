//! Interval maps with an indifferent fixed point at 0.
//!
//! * Farey: `x/(1-x)` on [0, 1/2], `1/x - 1` on (1/2, 1].
//! * Lasota–Yorke: `x/(1-x)` on [0, 1/2], `2x - 1` on (1/2, 1].
//! * Thaler α = 0 example: `x + x² e^{-1/x}` on [0, a], `(x-a)/(1-a)` on (a, 1],
//!   with `a` the root of `x + x² e^{-1/x} = 1`.
//! * Gauss: `1/x - ⌊1/x⌋`, the map induced by Farey on (1/2, 1].
//!
//! The three rational maps act exactly on [`Ratio`] values of any integer
//! type; the Thaler map only has a floating point form here.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("point {0} outside the map's domain")]
    Domain(String),
    #[error("the indifferent fixed point 0 never escapes")]
    NeverEscapes,
    #[error("{0} has no exact rational form")]
    NotRational(MapKind),
    #[error("unknown map name {0:?}; expected farey, lasota-yorke, thaler0 or gauss")]
    UnknownName(String),
    #[error("wandering sequence known only up to index {len}, needed {needed}")]
    WanderingTooShort { len: u64, needed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Farey,
    LasotaYorke,
    #[serde(rename = "thaler0")]
    ThalerAlpha0,
    Gauss,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Farey => "farey",
            MapKind::LasotaYorke => "lasota-yorke",
            MapKind::ThalerAlpha0 => "thaler0",
            MapKind::Gauss => "gauss",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "farey" => Ok(MapKind::Farey),
            "lasota-yorke" => Ok(MapKind::LasotaYorke),
            "thaler0" => Ok(MapKind::ThalerAlpha0),
            "gauss" => Ok(MapKind::Gauss),
            other => Err(MapError::UnknownName(other.to_string())),
        }
    }
}

/// A map together with its branch boundary and reference set `A = (lower, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDescriptor {
    pub kind: MapKind,
    boundary: f64,
}

impl MapDescriptor {
    pub fn new(kind: MapKind) -> Self {
        let boundary = match kind {
            MapKind::Farey | MapKind::LasotaYorke => 0.5,
            MapKind::ThalerAlpha0 => thaler_boundary(),
            // Branches of the Gauss map are (1/(k+1), 1/k]; the first boundary is 1/2.
            MapKind::Gauss => 0.5,
        };
        Self { kind, boundary }
    }

    /// Boundary between the left (indifferent) branch and the right branch.
    pub fn branch_boundary(&self) -> f64 {
        self.boundary
    }

    /// Lower end of the reference set `A = (lower, 1]`.
    ///
    /// For every shipped map this is the right branch's domain.
    pub fn reference_lower(&self) -> f64 {
        self.boundary
    }

    pub fn in_reference(&self, x: f64) -> bool {
        x > self.boundary && x <= 1.0
    }

    pub fn apply(&self, x: f64) -> Result<f64, MapError> {
        apply_f64(self.kind, x)
    }
}

fn check_unit<T: Clone + Integer>(x: &Ratio<T>) -> Result<(), MapError> {
    if *x < Ratio::zero() || *x > Ratio::one() {
        return Err(MapError::Domain("rational outside [0, 1]".into()));
    }
    Ok(())
}

/// Exact image of a rational point under Farey, Lasota–Yorke or Gauss.
pub fn apply_rational<T: Clone + Integer>(kind: MapKind, x: &Ratio<T>) -> Result<Ratio<T>, MapError> {
    check_unit(x)?;
    let one = Ratio::<T>::one();
    let two = one.clone() + one.clone();
    let half = one.clone() / two.clone();
    match kind {
        MapKind::Farey | MapKind::LasotaYorke if *x <= half => Ok(x.clone() / (one - x.clone())),
        MapKind::Farey => Ok(x.recip() - one),
        MapKind::LasotaYorke => Ok(x.clone() * two - one),
        MapKind::Gauss => {
            if x.is_zero() {
                return Ok(Ratio::zero());
            }
            let inv = x.recip();
            Ok(inv.fract())
        }
        MapKind::ThalerAlpha0 => Err(MapError::NotRational(kind)),
    }
}

/// Floating point image under any of the maps.
pub fn apply_f64(kind: MapKind, x: f64) -> Result<f64, MapError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(MapError::Domain(x.to_string()));
    }
    Ok(match kind {
        MapKind::Farey | MapKind::LasotaYorke if x <= 0.5 => x / (1.0 - x),
        MapKind::Farey => 1.0 / x - 1.0,
        MapKind::LasotaYorke => 2.0 * x - 1.0,
        MapKind::Gauss if x == 0.0 => 0.0,
        MapKind::Gauss => {
            let inv = 1.0 / x;
            inv - inv.floor()
        }
        MapKind::ThalerAlpha0 => {
            let a = thaler_boundary();
            if x <= a {
                thaler_left(x)
            } else {
                (x - a) / (1.0 - a)
            }
        }
    })
}

/// Left branch of the Thaler example, `x + x² e^{-1/x}`.
pub fn thaler_left(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x + x * x * (-1.0 / x).exp()
    }
}

/// n-th iterate of the inverse left branch, `u_0^n(x) = x / (1 + n x)`.
pub fn u0_pow<T: Clone + Integer>(x: &Ratio<T>, n: T) -> Ratio<T> {
    let one = Ratio::<T>::one();
    x.clone() / (one + Ratio::from_integer(n) * x.clone())
}

/// Closed-form laminar escape from (0, 1/2]: the least `k >= 1` with
/// `x / (1 - k x) > 1/2`, and the exit point.
pub fn laminar_escape<T: Clone + Integer>(x: &Ratio<T>) -> Result<(T, Ratio<T>), MapError> {
    if x.is_zero() {
        return Err(MapError::NeverEscapes);
    }
    let two = T::one() + T::one();
    let (p, q) = (x.numer().clone(), x.denom().clone());
    if x > &Ratio::new(T::one(), two.clone()) || p < T::zero() {
        return Err(MapError::Domain("laminar escape needs 0 < x <= 1/2".into()));
    }
    // k* = floor((1 - 2x) / x) + 1 = floor((q - 2p) / p) + 1
    let k = (q.clone() - two * p.clone()) / p.clone() + T::one();
    let exit = Ratio::new(p.clone(), q - k.clone() * p);
    Ok((k, exit))
}

/// Wandering rate of K_1 = (1/2, 1] under the Farey map: `log(n + 2)`.
pub fn farey_wandering(n: u64) -> f64 {
    (n as f64 + 2.0).ln()
}

/// `μ(K_1 ∩ {φ > n}) = log((n + 2) / (n + 1))`.
pub fn farey_tail(n: u64) -> f64 {
    (1.0 / (n as f64 + 1.0)).ln_1p()
}

/// Root `a` of `x + x² e^{-1/x} = 1` in (0, 1), by bisection.
pub fn thaler_boundary() -> f64 {
    let g = |x: f64| thaler_left(x) - 1.0;
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * lo {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Tail masses `m_k = μ(A ∩ {φ > k})` and their partial sums `W_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum WanderingSequence {
    /// Farey map with A = K_1: `m_k = log((k+2)/(k+1))`, `W_n = log(n+2)`.
    Farey,
    /// Renewal tails `m_0 = 1`, `m_k = k^{-α}`. Partial sums are tabulated up
    /// to `prefix.len() - 1` and extended by Euler–Maclaurin beyond.
    PowerTail { alpha: f64, prefix: Vec<f64> },
    /// Constant tails `m_k = m`, so `W_n = (n + 1) m`.
    Constant { mass: f64 },
    /// Explicit tail masses; `W_n` is only defined for `n < tails.len()`.
    Table { tails: Vec<f64>, cumulative: Vec<f64> },
}

impl WanderingSequence {
    pub fn power_tail(alpha: f64, table_len: usize) -> Self {
        let len = table_len.max(2);
        let mut prefix = Vec::with_capacity(len);
        let mut acc = 1.0;
        prefix.push(acc);
        for k in 1..len {
            acc += (k as f64).powf(-alpha);
            prefix.push(acc);
        }
        WanderingSequence::PowerTail { alpha, prefix }
    }

    pub fn table(tails: Vec<f64>) -> Self {
        let cumulative = tails
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        WanderingSequence::Table { tails, cumulative }
    }

    pub fn tail(&self, k: u64) -> Result<f64, MapError> {
        match self {
            WanderingSequence::Farey => Ok(farey_tail(k)),
            WanderingSequence::PowerTail { alpha, .. } => Ok(if k == 0 { 1.0 } else { (k as f64).powf(-alpha) }),
            WanderingSequence::Constant { mass } => Ok(*mass),
            WanderingSequence::Table { tails, .. } => tails.get(k as usize).copied().ok_or(MapError::WanderingTooShort {
                len: tails.len() as u64,
                needed: k,
            }),
        }
    }

    pub fn cumulative(&self, n: u64) -> Result<f64, MapError> {
        match self {
            WanderingSequence::Farey => Ok(farey_wandering(n)),
            WanderingSequence::PowerTail { alpha, prefix } => {
                let last = prefix.len() as u64 - 1;
                if n <= last {
                    return Ok(prefix[n as usize]);
                }
                // Sum over (last, n] of k^{-α} by Euler–Maclaurin.
                let (a, big, small) = (*alpha, n as f64, last as f64);
                let f = |x: f64| x.powf(-a);
                let integral = (big.powf(1.0 - a) - small.powf(1.0 - a)) / (1.0 - a);
                let ends = 0.5 * (f(big) - f(small));
                let d1 = |x: f64| -a * x.powf(-a - 1.0);
                let d3 = |x: f64| -a * (a + 1.0) * (a + 2.0) * x.powf(-a - 3.0);
                let corr = (d1(big) - d1(small)) / 12.0 - (d3(big) - d3(small)) / 720.0;
                Ok(prefix[last as usize] + integral + ends + corr)
            }
            WanderingSequence::Constant { mass } => Ok((n as f64 + 1.0) * mass),
            WanderingSequence::Table { cumulative, .. } => cumulative.get(n as usize).copied().ok_or(MapError::WanderingTooShort {
                len: cumulative.len() as u64,
                needed: n,
            }),
        }
    }
}
