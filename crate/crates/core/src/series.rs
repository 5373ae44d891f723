//! Jacobi theta series and infinite sums of shifted scaled Donsker deltas.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::donsker::{s_scaled_delta, DonskerDelta};
use crate::error::{Error, Result};
use crate::function_space::{FunctionElement, Sector};

/// Arguments of `ϑ(ρ, τ) = Σ_n exp(πin²τ + 2πinρ)`; requires `Im τ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgs {
    rho: Complex64,
    tau: Complex64,
}

impl ThetaArgs {
    pub fn new(rho: Complex64, tau: Complex64) -> Result<Self> {
        if !(rho.re.is_finite() && rho.im.is_finite() && tau.re.is_finite()) {
            return Err(Error::InvalidArgument("theta arguments must be finite".into()));
        }
        if !(tau.im > 0.0 && tau.im.is_finite()) {
            return Err(Error::DivergentTheta(format!(
                "Im(tau) = {} is not positive; the series does not converge",
                tau.im
            )));
        }
        Ok(Self { rho, tau })
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Terms `|n| ≤ truncation` were summed.
    pub truncation: u64,
}

/// Real part of the exponent of the `n`-th term: `−πn² Im τ − 2πn Im ρ`.
fn log_modulus(args: &ThetaArgs, n: f64) -> f64 {
    -PI * n * n * args.tau.im - 2.0 * PI * n * args.rho.im
}

/// Sums `|n| ≤ N` with `N` the first index past the peak at which the Gaussian tail bound on
/// the remaining terms drops below `tol` relative to the largest term.
pub fn theta(args: ThetaArgs, tol: f64) -> Result<ThetaValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let q = PI * args.tau.im;
    let g = 2.0 * PI * args.rho.im.abs();
    let peak_n = (g / (2.0 * q)).round();
    let peak = log_modulus(&args, peak_n).max(log_modulus(&args, -peak_n));
    let ln_tol = tol.ln();
    let mut n = peak_n.max(0.0);
    loop {
        // Terms beyond n + 1 on the dominant side decay at least geometrically with ratio
        // exp(−(2q(n+1) − g)), and the other side is smaller.
        let next = -q * (n + 1.0).powi(2) + g * (n + 1.0);
        let ratio = (-(2.0 * q * (n + 1.0) - g)).exp();
        if ratio < 1.0 && next - peak + (2.0 / (1.0 - ratio)).ln() < ln_tol {
            break;
        }
        n += 1.0;
        if n > 1e7 {
            return Err(Error::InvalidArgument(format!(
                "theta truncation exceeds 1e7 terms (Im tau = {})",
                args.tau.im
            )));
        }
    }
    let big_n = n as i64;
    let term = |k: i64| {
        let kf = k as f64;
        (Complex64::i() * PI * (kf * kf * args.tau + 2.0 * kf * args.rho)).exp()
    };
    // Pair ±k, adding from the outside in.
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=big_n).rev() {
        acc += term(k) + term(-k);
    }
    acc += term(0);
    Ok(ThetaValue {
        value: acc,
        truncation: big_n as u64,
    })
}

/// `Σ_n σ_z δ(B(t) − a + n)` for `z ∈ S_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct DeltaSeries {
    z: Complex64,
    t: f64,
    a: Complex64,
}

/// `Re(1/z²)` exceeds rounding noise, i.e. the Gaussian factor in `n` genuinely decays.
fn decays(z: Complex64) -> bool {
    let w = (z * z).inv();
    w.re > 8.0 * f64::EPSILON * w.norm()
}

impl DeltaSeries {
    pub fn new(z: Complex64, t: f64, a: Complex64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidArgument("offset a must be finite".into()));
        }
        let in_sector = Sector::principal().contains(z)?;
        let decaying = decays(z);
        if !(in_sector && decaying) {
            return Err(Error::DivergentTheta(format!(
                "z = {z} outside S_0 (Re(1/z^2) = {:e}); the series does not converge",
                (z * z).inv().re
            )));
        }
        Ok(Self { z, t, a })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    fn base_delta(&self) -> Result<DonskerDelta> {
        DonskerDelta::new(FunctionElement::brownian(self.t)?, self.a, self.z, Sector::principal())
    }

    /// `Re(1/z²)`.
    pub fn decay(&self) -> f64 {
        (self.z * self.z).inv().re
    }
}

/// Theta arguments of `Σ_n σ_zδ(B(t) − a + nP)`: with `u = ∫₀ᵗξ − a/z`,
/// `ρ = iPu/(2πtz)` and `τ = iP²/(2πtz²)`. Returns `DivergentTheta` when `Im τ ≤ 0`.
pub fn period_theta_args(
    z: Complex64,
    t: f64,
    a: Complex64,
    period: f64,
    xi: &FunctionElement,
) -> Result<ThetaArgs> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroScaling);
    }
    let u = xi.integral_to(t) - a / z;
    let rho = Complex64::i() * period * u / (2.0 * PI * t * z);
    let tau = Complex64::i() * period * period / (2.0 * PI * t * z * z);
    if !decays(z) {
        return Err(Error::DivergentTheta(format!(
            "tau = {tau} has Im(tau) = {:e}; the series does not converge for z = {z}",
            tau.im
        )));
    }
    ThetaArgs::new(rho, tau)
}

/// `SΦ(ξ) = Sσ_zδ(ξ) · ϑ(iu/(2πtz), i/(2πtz²))`, `u = ∫₀ᵗξ − a/z`.
pub fn s_series(d: &DeltaSeries, xi: &FunctionElement) -> Result<Complex64> {
    Ok(s_series_detailed(d, xi)?.0)
}

/// [`s_series`] together with the theta truncation index.
pub fn s_series_detailed(d: &DeltaSeries, xi: &FunctionElement) -> Result<(Complex64, u64)> {
    let base = s_scaled_delta(&d.base_delta()?, xi)?;
    let args = period_theta_args(d.z, d.t, d.a, 1.0, xi)?;
    let th = theta(args, 1e-17)?;
    Ok((base * th.value, th.truncation))
}

/// `N = ⌈√(ln(1/tol) · 4t / Re(1/z²))⌉ + 2`, the cutoff at which the Gaussian factor of the
/// tail estimate falls below `tol`.
pub fn series_truncation(d: &DeltaSeries, tol: f64) -> Result<u64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(((1.0 / tol).ln() * 4.0 * d.t / d.decay()).sqrt().ceil() as u64 + 2)
}

/// `C` in `|SΦ(ξ) − SΦ_N(ξ)| ≤ C exp(−Re(1/z²) N² / 4t)`.
///
/// Each term obeys `|term_n| ≤ e^{E|u|²/2t} e^{−R n²/4t} / (|z|√(2πt))` with `R = Re(1/z²)`,
/// `E = 1 + 2/(|z|² R)` and `u = a/z − ∫₀ᵗξ`; summing over `|n| > N` gives
/// `C = e^{E|u|²/2t} (ϑ(0, iR/4πt) − 1) / (|z|√(2πt))`.
pub fn series_tail_constant(d: &DeltaSeries, xi: &FunctionElement) -> Result<f64> {
    let r = d.decay();
    let zn = d.z.norm();
    let e = 1.0 + 2.0 / (zn * zn * r);
    let u = d.a / d.z - xi.integral_to(d.t);
    let th = theta(
        ThetaArgs::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, r / (4.0 * PI * d.t)))?,
        1e-16,
    )?;
    Ok((e * u.norm_sqr() / (2.0 * d.t)).exp() * (th.value.re - 1.0) / (zn * (2.0 * PI * d.t).sqrt()))
}

pub fn series_tail_bound(d: &DeltaSeries, xi: &FunctionElement, n: u64) -> Result<f64> {
    let nf = n as f64;
    Ok(series_tail_constant(d, xi)? * (-d.decay() * nf * nf / (4.0 * d.t)).exp())
}

/// Outcome of a finite partial sum, with the decay diagnosis of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub value: Complex64,
    /// True when the terms do not decay in `n`, so the infinite series diverges.
    pub divergent: bool,
    /// Coefficient `−Re(1/z²)/2t` of `n²` in `ln|term_n|`; non-negative means no decay.
    pub growth_exponent: f64,
    /// `(ln|term_N| − ln|term_0|) / N²` as measured (zero for `N = 0`).
    pub measured_exponent: f64,
}

/// `SΦ_N(ξ) = Σ_{|n| ≤ N} Sσ_zδ(B(t) − a + n)(ξ)` for any `z` in the given sector, including
/// scalings for which the infinite series diverges.
pub fn partial_sum(
    z: Complex64,
    t: f64,
    a: Complex64,
    sector: Sector,
    n: u64,
    xi: &FunctionElement,
) -> Result<PartialSum> {
    let d = DonskerDelta::new(FunctionElement::brownian(t)?, a, z, sector)?;
    let term = |k: i64| s_scaled_delta(&d.with(a - k as f64, z)?, xi);
    let big = n as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=big).rev() {
        acc += term(k)? + term(-k)?;
    }
    let t0 = term(0)?;
    acc += t0;
    let measured_exponent = if big == 0 {
        0.0
    } else {
        let tn = term(big)?.norm().max(term(-big)?.norm());
        (tn.ln() - t0.norm().ln()) / (big * big) as f64
    };
    let growth_exponent = -(z * z).inv().re / (2.0 * t);
    Ok(PartialSum {
        value: acc,
        divergent: !decays(z),
        growth_exponent,
        measured_exponent,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesJson {
    z: [f64; 2],
    t: f64,
    a: [f64; 2],
}

impl TryFrom<SeriesJson> for DeltaSeries {
    type Error = Error;
    fn try_from(v: SeriesJson) -> Result<Self> {
        Self::new(Complex64::new(v.z[0], v.z[1]), v.t, Complex64::new(v.a[0], v.a[1]))
    }
}

impl From<DeltaSeries> for SeriesJson {
    fn from(d: DeltaSeries) -> Self {
        Self {
            z: [d.z.re, d.z.im],
            t: d.t,
            a: [d.a.re, d.a.im],
        }
    }
}
