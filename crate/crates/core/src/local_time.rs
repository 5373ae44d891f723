//! Brownian local time `L(t, a) = ∫₀ᵗ δ(B(s) − a) ds` through the S-transform of its
//! integrand, and an occupation-time Monte Carlo estimate of the same quantity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::FunctionElement;
use crate::mc::{jackknife, map_paths, Estimate};
use crate::quadrature::{integrate, integrate_semi_infinite, integrate_real, QuadratureSpec};

/// Fraction of `[0, t]` near `s = 0` integrated in the variable `u = 1/s`.
pub const SMALL_TIME_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QueryJson", into = "QueryJson")]
pub struct LocalTimeQuery {
    t: f64,
    a: Complex64,
}

impl LocalTimeQuery {
    /// Requires `t > 0` and `Re(a²) > 0`, the condition under which the integrand vanishes at
    /// `s = 0`. This admits both `a ∈ S_0` and its reflection `−S_0`.
    pub fn new(t: f64, a: Complex64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        let a2 = (a * a).re;
        if !(a2 > 0.0 && a2.is_finite()) {
            return Err(Error::DomainViolation(format!(
                "local time needs Re(a^2) > 0, got a = {a} with Re(a^2) = {a2}"
            )));
        }
        Ok(Self { t, a })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    /// `K₁(s) = (2πs)^{-1/2} e^{−Re(a²)/2s} e^{|a|²/2}`, the integrable prefactor of the
    /// integrand's growth bound.
    pub fn k1(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        (-(self.a * self.a).re / (2.0 * s) + 0.5 * self.a.norm_sqr()).exp() / (2.0 * PI * s).sqrt()
    }
}

/// `(2πs)^{-1/2} exp(−(∫₀ˢξ − a)² / 2s)`, the S-transform of `δ(B(s) − a)`.
pub fn integrand(s: f64, a: Complex64, xi: &FunctionElement) -> Complex64 {
    if s <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let u = xi.integral_to(s) - a;
    (-u * u / (2.0 * s)).exp() / (2.0 * PI * s).sqrt()
}

fn spec_for(tol: f64) -> Result<QuadratureSpec> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(QuadratureSpec {
        abs_tol: tol,
        rel_tol: 0.0,
        max_subdivisions: 4000,
    })
}

/// `∫_{t₁}^{t₂} Sδ(B(s) − a)(ξ) ds` for `0 ≤ t₁ < t₂`. Any part of the range below
/// `0.01 t₂` is integrated in `u = 1/s`, where the essential singularity at `s = 0` becomes
/// exponential decay at `u = ∞`.
pub fn s_local_time_between(
    a: Complex64,
    xi: &FunctionElement,
    t1: f64,
    t2: f64,
    tol: f64,
) -> Result<Complex64> {
    LocalTimeQuery::new(t2, a)?;
    if !(t1 >= 0.0 && t1 < t2) {
        return Err(Error::InvalidArgument(format!("need 0 <= t1 < t2, got [{t1}, {t2}]")));
    }
    let spec = spec_for(0.5 * tol)?;
    let cut = SMALL_TIME_FRACTION * t2;
    let mut total = Complex64::new(0.0, 0.0);
    if t1 < cut {
        // s ∈ (t1, cut] ↔ u ∈ [1/cut, 1/t1), ds = du/u².
        let g = |u: f64| integrand(1.0 / u, a, xi) / (u * u);
        total += if t1 == 0.0 {
            integrate_semi_infinite(g, 1.0 / cut, &spec)?.value
        } else {
            integrate(g, 1.0 / cut, 1.0 / t1, &spec)?.value
        };
    }
    let lo = t1.max(cut);
    total += integrate(|s| integrand(s, a, xi), lo, t2, &spec)?.value;
    Ok(total)
}

/// `SL(t, a)(ξ) = ∫₀ᵗ (2πs)^{-1/2} exp(−(∫₀ˢξ − a)² / 2s) ds`.
pub fn s_local_time(q: &LocalTimeQuery, xi: &FunctionElement, tol: f64) -> Result<Complex64> {
    s_local_time_between(q.a, xi, 0.0, q.t, tol)
}

/// Occupation-time estimate `E[|{s ≤ t : |B(s) − a| < ε}|] / 2ε` from `paths` Brownian paths
/// sampled at `steps` equal time steps (right-endpoint Riemann sum of the indicator).
pub fn occupation_oracle(
    t: f64,
    a: f64,
    eps: f64,
    paths: u64,
    steps: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::DomainViolation(format!("occupation oracle needs real a > 0, got {a}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("band half-width must be positive, got {eps}")));
    }
    if t == 0.0 {
        return Ok(Estimate {
            re: 0.0,
            im: 0.0,
            stderr: 0.0,
        });
    }
    let dt = t / steps as f64;
    let values = map_paths(t, steps, paths, seed, |b| {
        let hits = b[1..].iter().filter(|x| (*x - a).abs() < eps).count();
        Complex64::new(hits as f64 * dt / (2.0 * eps), 0.0)
    })?;
    jackknife(&values)
}

/// Bias allowance of [`occupation_oracle`] against `L(t, a)` at `ξ = 0`.
///
/// The band average of `x ↦ L(t, x)` differs from `L(t, a)` by `ε²/6 · ∂²L(t, a)` to leading
/// order, with `|∂²L| ≤ ∫₀ᵗ |p_s''(a)| ds` and `p_s''(x) = p_s(x)(x²/s² − 1/s)`; a factor 1.5
/// covers the `O(ε⁴)` remainder. The Riemann sum over the time grid adds at most `dt` times
/// the total variation of the unimodal band probability, bounded by twice its maximum
/// `1/(√(2πe)(a − ε))`.
pub fn occupation_bias_bound(t: f64, a: f64, eps: f64, steps: usize) -> Result<f64> {
    if !(a > eps && eps > 0.0) {
        return Err(Error::InvalidArgument("bias bound needs a > eps > 0".into()));
    }
    let p2 = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let p = (-a * a / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
        (p * (a * a / (s * s) - 1.0 / s)).abs()
    };
    let curvature = integrate_real(p2, 0.0, t, &QuadratureSpec::absolute(1e-12))?;
    let dt = t / steps as f64;
    let peak = 1.0 / ((2.0 * PI * std::f64::consts::E).sqrt() * (a - eps));
    Ok(1.5 * eps * eps / 6.0 * curvature + 2.0 * dt * peak)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryJson {
    t: f64,
    a: [f64; 2],
}

impl TryFrom<QueryJson> for LocalTimeQuery {
    type Error = Error;
    fn try_from(v: QueryJson) -> Result<Self> {
        Self::new(v.t, Complex64::new(v.a[0], v.a[1]))
    }
}

impl From<LocalTimeQuery> for QueryJson {
    fn from(q: LocalTimeQuery) -> Self {
        Self {
            t: q.t,
            a: [q.a.re, q.a.im],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain() {
        assert!(matches!(
            LocalTimeQuery::new(1.0, Complex64::new(0.0, 1.0)),
            Err(Error::DomainViolation(_))
        ));
        assert!(LocalTimeQuery::new(1.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(LocalTimeQuery::new(1.0, Complex64::new(-1.0, 0.0)).is_ok());
        assert!(LocalTimeQuery::new(0.0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn k1_is_zero_at_origin_and_positive_after() {
        let q = LocalTimeQuery::new(1.0, Complex64::new(1.0, 0.2)).unwrap();
        assert_eq!(q.k1(0.0), 0.0);
        assert!(q.k1(0.5) > 0.0);
    }

    #[test]
    fn zero_time_occupation_is_zero() {
        let e = occupation_oracle(0.0, 1.0, 0.05, 10, 10, 1).unwrap();
        assert_eq!(e.re, 0.0);
    }
}
