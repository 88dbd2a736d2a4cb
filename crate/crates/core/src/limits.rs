//! Limit laws of the waiting-time processes and the large-deviation rates.
//!
//! With `c = sin(πα)/π` and `p = 1/(1-α)` the parametric densities are
//!
//! | law | density | support |
//! |-----|---------|---------|
//! | φ_α | `c / (x (x-1)^α)` | x > 1 |
//! | η_α | `c (1 - max(1-x, 0)^α) / x^{1+α}` | x > 0 |
//! | λ_α | `c p (1 - max(1-x^p, 0)^α) / x^p` | x > 0 |
//! | γ_α | `(c/α) (1 - max(1-x^{-1/α}, 0)^α)` | x > 0 |
//! | δ_α | `c p / (1 + x^p)` | x > 0 |
//! | θ_α | `(c/α) / (1 - x^{1/α})^α` | 0 < x < 1 |
//!
//! and `λ = η^{1-α}`, `γ = η^{-α}`, `δ = (φ-1)^{1-α}`, `θ = φ^{-α}` in
//! distribution. The λ law is also written ζ, and θ also χ.
//!
//! [`LimitLaw::cdf`] goes through those identities, reducing everything to
//! `F_φ` and `F_η` on smooth substituted integrals. [`LimitLaw::cdf_direct`]
//! integrates each density as written, which makes the two routes an
//! independent cross-check of the density formulas.
//!
//! At `α ∈ {0, 1}` the parametric laws degenerate: `φ_0 = η_0 = λ_0 = δ_0 =
//! γ_1 = ∞`, `φ_1 = θ_1 = 1`, `η_1 = 0`, while the distorted critical laws
//! `λ_1`, `δ_1`, `γ_0`, `θ_0` are uniform on [0, 1].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, integrate_power_singular, QuadError};

/// Absolute tolerance of every quadrature behind a CDF value.
const TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("alpha = {0} outside [0, 1]")]
    AlphaRange(f64),
    #[error("law is a point mass at {0}; it has no density")]
    PointMass(f64),
    #[error("unknown law name {0:?}")]
    UnknownName(String),
    #[error("rate undefined at x = {x}, y = {y}")]
    RateDomain { x: f64, y: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Phi,
    Eta,
    Lambda,
    Gamma,
    Delta,
    Theta,
    Uniform01,
    PointMass,
}

impl LawKind {
    pub const PARAMETRIC: [LawKind; 6] = [
        LawKind::Phi,
        LawKind::Eta,
        LawKind::Lambda,
        LawKind::Gamma,
        LawKind::Delta,
        LawKind::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Phi => "phi",
            LawKind::Eta => "eta",
            LawKind::Lambda => "lambda",
            LawKind::Gamma => "gamma",
            LawKind::Delta => "delta",
            LawKind::Theta => "theta",
            LawKind::Uniform01 => "uniform01",
            LawKind::PointMass => "pointmass",
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = LimitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "phi" => LawKind::Phi,
            "eta" => LawKind::Eta,
            "lambda" | "zeta" => LawKind::Lambda,
            "gamma" => LawKind::Gamma,
            "delta" => LawKind::Delta,
            "theta" | "chi" => LawKind::Theta,
            "uniform01" | "uniform" => LawKind::Uniform01,
            "pointmass" => LawKind::PointMass,
            other => return Err(LimitError::UnknownName(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub kind: LawKind,
    /// Index in (0, 1) for the parametric kinds, unused otherwise.
    pub alpha: f64,
    /// Location of a point mass (may be `+∞`), unused otherwise.
    pub point: f64,
}

impl LimitLaw {
    /// The law `kind_α`, with the boundary indices mapped to their limits.
    pub fn new(kind: LawKind, alpha: f64) -> Result<Self, LimitError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LimitError::AlphaRange(alpha));
        }
        use LawKind::*;
        let boundary = alpha == 0.0 || alpha == 1.0;
        if !boundary || matches!(kind, Uniform01 | PointMass) {
            return Ok(match kind {
                Uniform01 => Self::uniform(),
                PointMass => Self::point_mass(alpha),
                _ => Self { kind, alpha, point: 0.0 },
            });
        }
        let zero = alpha == 0.0;
        Ok(match (kind, zero) {
            (Phi | Eta | Lambda | Delta, true) | (Gamma, false) => Self::point_mass(f64::INFINITY),
            (Phi | Theta, false) => Self::point_mass(1.0),
            (Eta, false) => Self::point_mass(0.0),
            (Lambda | Delta, false) | (Gamma | Theta, true) => Self::uniform(),
            (Uniform01 | PointMass, _) => unreachable!(),
        })
    }

    pub fn uniform() -> Self {
        Self {
            kind: LawKind::Uniform01,
            alpha: 0.0,
            point: 0.0,
        }
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            kind: LawKind::PointMass,
            alpha: 0.0,
            point: at,
        }
    }

    fn c(&self) -> f64 {
        (PI * self.alpha).sin() / PI
    }

    fn p(&self) -> f64 {
        1.0 / (1.0 - self.alpha)
    }

    /// Density at `x`; `+∞` at an integrable singularity on the boundary.
    pub fn pdf(&self, x: f64) -> Result<f64, LimitError> {
        let a = self.alpha;
        let c = self.c();
        let p = self.p();
        Ok(match self.kind {
            LawKind::PointMass => return Err(LimitError::PointMass(self.point)),
            LawKind::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            LawKind::Phi => {
                if x < 1.0 {
                    0.0
                } else if x == 1.0 {
                    f64::INFINITY
                } else {
                    c / (x * (x - 1.0).powf(a))
                }
            }
            LawKind::Eta => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    f64::INFINITY
                } else {
                    c * one_minus_pow_over(x, a) * x.powf(-a)
                }
            }
            LawKind::Lambda => {
                if x <= 0.0 {
                    0.0
                } else {
                    c * p * one_minus_pow_over(x.powf(p), a)
                }
            }
            LawKind::Gamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    let v = x.powf(-1.0 / a);
                    if v >= 1.0 {
                        c / a
                    } else {
                        c / a * v * one_minus_pow_over(v, a)
                    }
                }
            }
            LawKind::Delta => {
                if x <= 0.0 {
                    0.0
                } else {
                    c * p / (1.0 + x.powf(p))
                }
            }
            LawKind::Theta => {
                if x <= 0.0 || x > 1.0 {
                    0.0
                } else if x == 1.0 {
                    f64::INFINITY
                } else {
                    c / a / (1.0 - x.powf(1.0 / a)).powf(a)
                }
            }
        })
    }

    /// CDF through the distributional identities.
    pub fn cdf(&self, x: f64) -> Result<f64, LimitError> {
        let a = self.alpha;
        let v = match self.kind {
            LawKind::PointMass => return Ok(if x >= self.point { 1.0 } else { 0.0 }),
            LawKind::Uniform01 => x.clamp(0.0, 1.0),
            LawKind::Phi => {
                if x <= 1.0 {
                    0.0
                } else {
                    self.phi_cdf_excess(x - 1.0)?
                }
            }
            LawKind::Eta => self.eta_cdf(x)?,
            LawKind::Lambda => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.eta_cdf(x.powf(self.p()))?
                }
            }
            LawKind::Gamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.eta_sf(x.powf(-1.0 / a))?
                }
            }
            LawKind::Delta => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.phi_cdf_excess(x.powf(self.p()))?
                }
            }
            LawKind::Theta => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    // φ^{-α} <= x  <=>  φ - 1 >= x^{-1/α} - 1
                    self.phi_sf_excess((-x.ln() / a).exp_m1())?
                }
            }
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// `F_φ(1 + d)` for `d > 0`.
    fn phi_cdf_excess(&self, d: f64) -> Result<f64, LimitError> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        if d <= 1.0 {
            self.phi_near(d)
        } else {
            Ok(1.0 - self.phi_far(d)?)
        }
    }

    /// `1 - F_φ(1 + d)`.
    fn phi_sf_excess(&self, d: f64) -> Result<f64, LimitError> {
        if d <= 0.0 {
            return Ok(1.0);
        }
        if d <= 1.0 {
            Ok(1.0 - self.phi_near(d)?)
        } else {
            self.phi_far(d)
        }
    }

    /// `∫_1^{1+d} f_φ` via `t = (u-1)^{1-α}`: `∫_0^{d^{1-α}} c p / (1 + t^p) dt`.
    fn phi_near(&self, d: f64) -> Result<f64, LimitError> {
        let (c, p) = (self.c(), self.p());
        let upper = d.powf(1.0 - self.alpha);
        Ok(integrate(|t| c * p / (1.0 + t.powf(p)), 0.0, upper, TOL, 1e-14)?.value)
    }

    /// `∫_{1+d}^∞ f_φ` via `v = u^{-α}`: `(c/α) ∫_0^{(1+d)^{-α}} (1 - v^{1/α})^{-α} dv`.
    fn phi_far(&self, d: f64) -> Result<f64, LimitError> {
        let (a, c) = (self.alpha, self.c());
        let upper = (-a * d.ln_1p()).exp();
        Ok(integrate(|v| c / a * (1.0 - v.powf(1.0 / a)).powf(-a), 0.0, upper, TOL, 1e-14)?.value)
    }

    /// `∫_0^y f_η` for `0 <= y <= 1` via `t = u^{1-α}`.
    fn eta_head(&self, lo: f64, hi: f64) -> Result<f64, LimitError> {
        let (a, c, q) = (self.alpha, self.c(), self.p());
        let g = move |t: f64| {
            let s = t.powf(q);
            c * q * one_minus_pow_over(s, a)
        };
        Ok(integrate(g, lo.powf(1.0 - a), hi.powf(1.0 - a), TOL, 1e-14)?.value)
    }

    fn eta_cdf(&self, y: f64) -> Result<f64, LimitError> {
        let (a, c) = (self.alpha, self.c());
        if y <= 0.0 {
            Ok(0.0)
        } else if y <= 1.0 {
            self.eta_head(0.0, y)
        } else {
            Ok(self.eta_head(0.0, 1.0)? + c / a * (1.0 - y.powf(-a)))
        }
    }

    fn eta_sf(&self, y: f64) -> Result<f64, LimitError> {
        let (a, c) = (self.alpha, self.c());
        if y <= 0.0 {
            Ok(1.0)
        } else if y >= 1.0 {
            Ok(c / a * y.powf(-a))
        } else {
            Ok(c / a + self.eta_head(y, 1.0)?)
        }
    }

    /// CDF by integrating the density formula itself, with power
    /// substitutions at the singular or slowly decaying ends.
    pub fn cdf_direct(&self, x: f64) -> Result<f64, LimitError> {
        let a = self.alpha;
        let c = self.c();
        Ok(match self.kind {
            LawKind::PointMass | LawKind::Uniform01 => self.cdf(x)?,
            LawKind::Phi => {
                if x <= 1.0 {
                    0.0
                } else if x <= 2.0 {
                    integrate_power_singular(|d| c / (1.0 + d), a, x - 1.0, TOL)?.value
                } else {
                    let head = integrate_power_singular(|d| c / (1.0 + d), a, 1.0, TOL)?.value;
                    head + self.direct_tail(0.5)? - self.direct_tail(1.0 / x)?
                }
            }
            LawKind::Eta => {
                let near = |x: f64| c * one_minus_pow_over(x, a);
                if x <= 0.0 {
                    0.0
                } else if x <= 1.0 {
                    integrate_power_singular(near, a, x, TOL)?.value
                } else {
                    integrate_power_singular(near, a, 1.0, TOL)?.value + self.direct_tail(1.0)? - self.direct_tail(1.0 / x)?
                }
            }
            LawKind::Lambda | LawKind::Gamma | LawKind::Delta => {
                if x <= 0.0 {
                    0.0
                } else {
                    let head = |x: f64| integrate(|u| self.pdf(u).unwrap_or(0.0), 0.0, x, TOL, 1e-14);
                    if x <= 1.0 {
                        head(x)?.value
                    } else {
                        head(1.0)?.value + self.direct_tail(1.0)? - self.direct_tail(1.0 / x)?
                    }
                }
            }
            LawKind::Theta => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    self.direct_mass()?
                } else if x <= 0.5 {
                    integrate(|u| self.pdf(u).unwrap_or(0.0), 0.0, x, TOL, 1e-14)?.value
                } else {
                    let head = integrate(|u| self.pdf(u).unwrap_or(0.0), 0.0, 0.5, TOL, 1e-14)?.value;
                    head + self.theta_reflected(0.5)? - self.theta_reflected(1.0 - x)?
                }
            }
        })
    }

    /// `∫_0^s f_θ(1 - u) du`, singular at `u = 0`.
    fn theta_reflected(&self, s: f64) -> Result<f64, LimitError> {
        let (a, c) = (self.alpha, self.c());
        let g = move |u: f64| {
            if u == 0.0 {
                // w ~ u / α
                return c / a * a.powf(a);
            }
            let w = -((-u).ln_1p() / a).exp_m1();
            c / a * (u / w).powf(a)
        };
        Ok(integrate_power_singular(g, a, s, TOL)?.value)
    }

    /// `∫_{1/t}^∞ f` in the variable `t = 1/u`, for the laws with an
    /// unbounded support; `t <= 1`.
    fn direct_tail(&self, t: f64) -> Result<f64, LimitError> {
        let a = self.alpha;
        let c = self.c();
        let p = self.p();
        let q = match self.kind {
            LawKind::Phi => integrate_power_singular(|t| c * (1.0 - t).powf(-a), 1.0 - a, t, TOL)?,
            LawKind::Eta => integrate_power_singular(|_| c, 1.0 - a, t, TOL)?,
            LawKind::Lambda => integrate_power_singular(|_| c * p, 2.0 - p, t, TOL)?,
            LawKind::Gamma => {
                let g = move |t: f64| {
                    let v = t.powf(1.0 / a);
                    c / a * one_minus_pow_over(v, a)
                };
                integrate_power_singular(g, 2.0 - 1.0 / a, t, TOL)?
            }
            LawKind::Delta => integrate_power_singular(|t| c * p / (1.0 + t.powf(p)), 2.0 - p, t, TOL)?,
            _ => unreachable!("no tail substitution for {}", self.kind),
        };
        Ok(q.value)
    }

    /// Total mass of the density, integrated directly.
    pub fn direct_mass(&self) -> Result<f64, LimitError> {
        match self.kind {
            LawKind::PointMass | LawKind::Uniform01 => Ok(1.0),
            LawKind::Theta => {
                let head = integrate(|u| self.pdf(u).unwrap_or(0.0), 0.0, 0.5, TOL, 1e-14)?.value;
                Ok(head + self.theta_reflected(0.5)?)
            }
            LawKind::Phi => {
                let head = integrate_power_singular(|d| self.c() / (1.0 + d), self.alpha, 1.0, TOL)?.value;
                Ok(head + self.direct_tail(0.5)?)
            }
            _ => Ok(self.cdf_direct(1.0)? + self.direct_tail(1.0)?),
        }
    }
}

/// `(1 - max(1 - s, 0)^a) / s` for `s >= 0`, continuous at 0 with value `a`.
fn one_minus_pow_over(s: f64, a: f64) -> f64 {
    if s == 0.0 {
        a
    } else if s >= 1.0 {
        1.0 / s
    } else {
        -(a * (-s).ln_1p()).exp_m1() / s
    }
}

/// `H(x) = 1 - log x` on (0, 1) and `1/x` on [1, ∞).
pub fn ld_rate_h(x: f64) -> f64 {
    if x < 1.0 {
        1.0 - x.ln()
    } else {
        1.0 / x
    }
}

/// `log((1 + y) / (x + y))` for `x ∈ [0, 1)`, `y >= 0`, `x + y > 0`.
pub fn ld_rate_joint(x: f64, y: f64) -> Result<f64, LimitError> {
    if !(0.0..1.0).contains(&x) || y < 0.0 || x + y == 0.0 || !y.is_finite() {
        return Err(LimitError::RateDomain { x, y });
    }
    Ok(((1.0 + y) / (x + y)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta_reg;

    const ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

    fn law(kind: LawKind, a: f64) -> LimitLaw {
        LimitLaw::new(kind, a).unwrap()
    }

    #[test]
    fn pdf_examples() {
        let t = law(LawKind::Theta, 0.5).pdf(0.6).unwrap();
        assert!((t - 2.0 / PI / (1.0f64 - 0.36).sqrt()).abs() < 1e-14);
        assert!((t - 0.7958).abs() < 1e-4);
        let d = law(LawKind::Delta, 0.5).pdf(1.0).unwrap();
        assert!((d - 1.0 / PI).abs() < 1e-15);
        assert_eq!(law(LawKind::Phi, 0.3).pdf(0.5).unwrap(), 0.0);
        assert_eq!(law(LawKind::Phi, 0.3).pdf(1.0).unwrap(), f64::INFINITY);
        assert_eq!(law(LawKind::Theta, 0.3).pdf(1.0).unwrap(), f64::INFINITY);
        assert!(law(LawKind::Phi, 1.0).pdf(2.0).is_err());
    }

    #[test]
    fn boundary_indices() {
        assert_eq!(law(LawKind::Phi, 0.0), LimitLaw::point_mass(f64::INFINITY));
        assert_eq!(law(LawKind::Phi, 1.0), LimitLaw::point_mass(1.0));
        assert_eq!(law(LawKind::Eta, 1.0), LimitLaw::point_mass(0.0));
        assert_eq!(law(LawKind::Gamma, 1.0), LimitLaw::point_mass(f64::INFINITY));
        assert_eq!(law(LawKind::Theta, 1.0), LimitLaw::point_mass(1.0));
        for k in [LawKind::Lambda, LawKind::Delta] {
            assert_eq!(law(k, 1.0).kind, LawKind::Uniform01);
            assert_eq!(law(k, 0.0), LimitLaw::point_mass(f64::INFINITY));
        }
        for k in [LawKind::Gamma, LawKind::Theta] {
            assert_eq!(law(k, 0.0).kind, LawKind::Uniform01);
        }
        assert!(LimitLaw::new(LawKind::Phi, 1.5).is_err());
        assert_eq!(law(LawKind::Phi, 1.0).cdf(1.0).unwrap(), 1.0);
        assert_eq!(law(LawKind::Phi, 0.0).cdf(1e300).unwrap(), 0.0);
    }

    #[test]
    fn cdf_examples() {
        let t = law(LawKind::Theta, 0.5).cdf(0.5).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-12);
        let d = law(LawKind::Delta, 0.5).cdf(1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        for a in ALPHAS {
            assert!(law(LawKind::Eta, a).cdf(1e100).unwrap() > 1.0 - 1e-9);
            assert_eq!(law(LawKind::Eta, a).cdf(-1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn phi_and_theta_match_beta_oracle() {
        // 1/φ_α ~ Beta(α, 1-α): F_φ(x) = 1 - I_{1/x}(α, 1-α).
        for a in ALPHAS {
            for &x in &[1.0001, 1.01, 1.5, 2.0, 3.0, 10.0, 1e4] {
                let ours = law(LawKind::Phi, a).cdf(x).unwrap();
                let oracle = 1.0 - beta_reg(a, 1.0 - a, 1.0 / x);
                assert!((ours - oracle).abs() < 1e-9, "a={a} x={x} {ours} {oracle}");
            }
            for &x in &[0.01, 0.2, 0.5, 0.9, 0.999] {
                let ours = law(LawKind::Theta, a).cdf(x).unwrap();
                let oracle = beta_reg(a, 1.0 - a, x.powf(1.0 / a));
                assert!((ours - oracle).abs() < 1e-9, "a={a} x={x} {ours} {oracle}");
            }
        }
    }

    #[test]
    fn densities_are_normalised() {
        for a in ALPHAS {
            for kind in LawKind::PARAMETRIC {
                let m = law(kind, a).direct_mass().unwrap_or_else(|e| panic!("{kind} {a} {e}"));
                assert!((m - 1.0).abs() < 1e-9, "{kind} a={a} mass={m}");
            }
        }
    }

    #[test]
    fn identity_and_direct_routes_agree() {
        for a in ALPHAS {
            for kind in LawKind::PARAMETRIC {
                let l = law(kind, a);
                for &x in &[0.05, 0.3, 0.7, 0.99, 1.0, 1.2, 2.5, 7.0, 40.0] {
                    let (i, d) = (l.cdf(x).unwrap(), l.cdf_direct(x).unwrap());
                    assert!((i - d).abs() < 1e-8, "{kind} a={a} x={x} {i} {d}");
                }
            }
        }
    }

    #[test]
    fn closed_forms_at_one_half() {
        let (t, d) = (law(LawKind::Theta, 0.5), law(LawKind::Delta, 0.5));
        for i in 1..50 {
            let x = i as f64 / 50.0;
            assert!((t.cdf(x).unwrap() - 2.0 / PI * x.asin()).abs() < 1e-11);
            let y = 5.0 * x;
            assert!((d.cdf(y).unwrap() - 2.0 / PI * y.atan()).abs() < 1e-11);
        }
    }

    #[test]
    fn rates() {
        assert_eq!(ld_rate_h(1.0), 1.0);
        assert!((ld_rate_h((-1f64).exp()) - 2.0).abs() < 1e-15);
        assert_eq!(ld_rate_h(2.0), 0.5);
        assert!((ld_rate_h(1.0 - 1e-12) - 1.0).abs() < 1e-11);
        assert!((ld_rate_joint(0.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((ld_rate_joint(0.5, 0.5).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert!(ld_rate_joint(1.0 - 1e-12, 2.0).unwrap() < 1e-11);
        assert!(ld_rate_joint(0.0, 0.0).is_err());
        assert!(ld_rate_joint(1.0, 0.0).is_err());
    }

    #[test]
    fn law_names() {
        assert_eq!("zeta".parse::<LawKind>().unwrap(), LawKind::Lambda);
        assert_eq!("chi".parse::<LawKind>().unwrap(), LawKind::Theta);
        assert!("beta".parse::<LawKind>().is_err());
    }
}
