//! Adaptive Gauss–Kronrod (7/15) quadrature with a global error heap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value}, error estimate {error}")]
    NoConvergence { value: f64, error: f64 },
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
    #[error("invalid integration setup: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const MAX_INTERVALS: usize = 4000;

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Piece, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: c });
    }
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: x2 });
        }
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    let (value, gauss) = (k * h, g * h);
    Ok(Piece {
        a,
        b,
        value,
        error: (value - gauss).abs(),
    })
}

/// `∫_a^b f` to within `max(abs_tol, rel_tol |I|)` (estimated).
///
/// Nodes are interior, so integrable endpoint singularities are tolerated,
/// though they converge slowly; see [`integrate_power_singular`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::Invalid("limits must be finite"));
    }
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if b < a {
        let q = integrate(f, b, a, abs_tol, rel_tol)?;
        return Ok(Quad { value: -q.value, ..q });
    }
    let first = kronrod(&f, a, b)?;
    let (mut value, mut error) = (first.value, first.error);
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(QuadError::NoConvergence { value, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(QuadError::NoConvergence { value, error });
        }
        let left = kronrod(&f, worst.a, mid)?;
        let right = kronrod(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Quad {
        value,
        error,
        intervals: heap.len(),
    })
}

/// `∫_0^T g(t) t^{-β} dt` for `β < 1`, where `g` is the regular part.
///
/// The substitution `t = T s^q` with `q = 1/(1-β)` turns the integral into
/// `T^{1-β} q ∫_0^1 g(T s^q) ds`, which has no singularity left.
pub fn integrate_power_singular<G: Fn(f64) -> f64>(g: G, beta: f64, t_max: f64, abs_tol: f64) -> Result<Quad, QuadError> {
    if beta.is_nan() || beta >= 1.0 {
        return Err(QuadError::Invalid("exponent must be below 1"));
    }
    if t_max <= 0.0 {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if beta <= 0.0 {
        return integrate(|t| g(t) * t.powf(-beta), 0.0, t_max, abs_tol, 1e-14);
    }
    let q = 1.0 / (1.0 - beta);
    let scale = t_max.powf(1.0 - beta) * q;
    let q_inner = integrate(|s| g(t_max * s.powf(q)), 0.0, 1.0, abs_tol / scale, 1e-14)?;
    Ok(Quad {
        value: scale * q_inner.value,
        error: scale * q_inner.error,
        intervals: q_inner.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 2.0, 1e-13, 0.0).unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((q.value - exact).abs() < 1e-10 * exact.abs());
    }

    #[test]
    fn smooth_integrals() {
        let q = integrate(f64::sin, 0.0, PI, 1e-14, 0.0).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
        let q = integrate(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-14, 0.0).unwrap();
        assert!((q.value - PI / 4.0).abs() < 1e-14);
        let q = integrate(|x| 1.0 / (1.0 + x * x), 1.0, 0.0, 1e-14, 0.0).unwrap();
        assert!((q.value + PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn power_singularities() {
        // ∫_0^1 t^{-1/2} dt = 2
        let q = integrate_power_singular(|_| 1.0, 0.5, 1.0, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
        // ∫_0^1 t^{-0.9} cos t dt against a series: Σ (-1)^k / ((2k)! (2k + 0.1))
        let mut series = 0.0;
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= (2 * k - 1) as f64 * (2 * k) as f64;
            }
            series += (-1f64).powi(k) / (fact * (2.0 * k as f64 + 0.1));
        }
        let q = integrate_power_singular(f64::cos, 0.9, 1.0, 1e-12).unwrap();
        assert!((q.value - series).abs() < 1e-11, "{} {}", q.value, series);
        // Non-singular exponent passes straight through.
        let q = integrate_power_singular(|_| 1.0, -1.0, 2.0, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        assert!(integrate_power_singular(|_| 1.0, 1.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x| (1.0 / x).sin() / x, 1e-12, 1.0, 1e-15, 0.0);
        assert!(matches!(r, Err(QuadError::NoConvergence { .. })));
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-9, 0.0);
        assert!(r.is_err());
    }
}
