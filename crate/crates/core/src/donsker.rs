//! Donsker's delta `δ(⟨ω,η⟩ − a)`, its complex scaling `σ_z δ`, and the regularized
//! approximants `φ_{n,z}` whose S-transforms converge to it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{inner_product, norm0, FunctionElement, NormSpec, Sector, MAX_HERMITE_LEN};
use crate::quadrature::{integrate_with_breaks, QuadratureSpec};
use crate::ufunctional::{check_sequence, ConvergenceReport, GrowthCertificate, TransformKind, UFunctional};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `Sδ(B(t) − a)(ξ) = (2πt)^{-1/2} exp(−(∫₀ᵗξ − a)² / 2t)`.
pub fn s_delta(t: f64, a: Complex64, xi: &FunctionElement) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    let u = xi.integral_to(t) - a;
    Ok((-u * u / (2.0 * t)).exp() / (2.0 * PI * t).sqrt())
}

/// `Tδ(B(t) − a)(ξ)`, the conditional Gaussian expectation
/// `p_t(a) exp(i v a/t − ½(|ξ|² − v²/t))` with `v = ∫₀ᵗξ`.
pub fn t_delta(t: f64, a: Complex64, xi: &FunctionElement) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    let v = xi.integral_to(t);
    let xx = inner_product(xi, xi);
    let density = (-a * a / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
    Ok(density * (Complex64::i() * v * a / t - 0.5 * (xx - v * v / t)).exp())
}

/// `σ_z δ(⟨ω, η⟩ − a)` for `z` in the sector `S_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeltaJson", into = "DeltaJson")]
pub struct DonskerDelta {
    eta: FunctionElement,
    a: Complex64,
    z: Complex64,
    sector: Sector,
    eta_norm: f64,
}

impl DonskerDelta {
    pub fn new(eta: FunctionElement, a: Complex64, z: Complex64, sector: Sector) -> Result<Self> {
        let eta_norm = norm0(&eta);
        if !(eta_norm > 0.0) {
            return Err(Error::InvalidElement("eta must have positive L2 norm".into()));
        }
        if !eta.is_real() {
            return Err(Error::InvalidElement("eta must be a real function".into()));
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidArgument("offset a must be finite".into()));
        }
        sector.require(z)?;
        Ok(Self {
            eta,
            a,
            z,
            sector,
            eta_norm,
        })
    }

    /// Unscaled `δ(B(t) − a)`.
    pub fn brownian(t: f64, a: Complex64) -> Result<Self> {
        Self::new(FunctionElement::brownian(t)?, a, one(), Sector::principal())
    }

    pub fn eta(&self) -> &FunctionElement {
        &self.eta
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn eta_norm(&self) -> f64 {
        self.eta_norm
    }

    /// Same direction and sector with a different offset and scaling.
    pub fn with(&self, a: Complex64, z: Complex64) -> Result<Self> {
        Self::new(self.eta.clone(), a, z, self.sector)
    }

    /// The constants of the order-two bound, valid for every `s > 0`:
    /// `K₁ = exp((1 + 1/s²)|a|² / (2|η|²|z|²)) / (√(2π)|z||η|)`, `K₂ = ½(1 + s²)`.
    pub fn growth_certificate(&self, s: f64) -> Result<GrowthCertificate> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
        }
        let zn = self.z.norm();
        let en = self.eta_norm;
        let k1 = ((1.0 + 1.0 / (s * s)) * self.a.norm_sqr() / (2.0 * en * en * zn * zn)).exp()
            / (SQRT_2PI * zn * en);
        GrowthCertificate::order_two(k1, 0.5 * (1.0 + s * s), NormSpec::L2)
    }

    pub fn s_functional(&self, s: f64) -> Result<UFunctional> {
        let cert = self.growth_certificate(s)?;
        let d = self.clone();
        Ok(UFunctional::new(TransformKind::S, cert, move |xi| s_scaled_delta(&d, xi)))
    }

    /// The T-transform with the certificate of its S-counterpart in the rotated argument.
    pub fn t_functional(&self, s: f64) -> Result<UFunctional> {
        let cert = self.growth_certificate(s)?;
        let cert = GrowthCertificate::order_two(cert.k1, cert.k2 + 0.5, NormSpec::L2)?;
        let d = self.clone();
        Ok(UFunctional::new(TransformKind::T, cert, move |xi| t_scaled_delta(&d, xi)))
    }
}

/// `Sσ_zδ(ξ) = exp(−(a − z(ξ,η))² / (2z²|η|²)) / (√(2π) z |η|)`.
pub fn s_scaled_delta(d: &DonskerDelta, xi: &FunctionElement) -> Result<Complex64> {
    let z = d.z;
    let n2 = d.eta_norm * d.eta_norm;
    let u = d.a - z * inner_product(xi, &d.eta);
    Ok((-u * u / (2.0 * z * z * n2)).exp() / (SQRT_2PI * z * d.eta_norm))
}

/// `Tσ_zδ(ξ) = (1/z) Tδ_{η, a/z}(ξ)` with the conditional-Gaussian closed form.
pub fn t_scaled_delta(d: &DonskerDelta, xi: &FunctionElement) -> Result<Complex64> {
    let b = d.a / d.z;
    let n2 = d.eta_norm * d.eta_norm;
    let v = inner_product(xi, &d.eta);
    let xx = inner_product(xi, xi);
    let density = (-b * b / (2.0 * n2)).exp() / (SQRT_2PI * d.eta_norm);
    Ok(density * (Complex64::i() * v * b / n2 - 0.5 * (xx - v * v / n2)).exp() / d.z)
}

/// Cutoff and smoothed direction for the approximant `φ_{n,z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximantSpec {
    n: u32,
    sector: Sector,
    eta_n: FunctionElement,
    eta_n_norm: f64,
}

impl ApproximantSpec {
    pub fn new(n: u32, sector: Sector, eta_n: FunctionElement) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cutoff n must be positive".into()));
        }
        if eta_n.contains_indicator() {
            return Err(Error::InvalidElement(
                "eta_n must be a Hermite span (a Schwartz function)".into(),
            ));
        }
        let eta_n_norm = norm0(&eta_n);
        if !(eta_n_norm > 0.0) {
            return Err(Error::InvalidElement("eta_n must have positive L2 norm".into()));
        }
        if !eta_n.is_real() {
            return Err(Error::InvalidElement("eta_n must be a real function".into()));
        }
        Ok(Self {
            n,
            sector,
            eta_n,
            eta_n_norm,
        })
    }

    /// `η_n` = projection of `η` onto the first `n²` Hermite functions (capped at the span
    /// limit). For a Hermite span `η` of length at most `n²` this is `η` itself.
    pub fn packaged(n: u32, sector: Sector, eta: &FunctionElement) -> Result<Self> {
        let len = (n as usize).saturating_mul(n as usize).min(MAX_HERMITE_LEN);
        Self::new(n, sector, eta.hermite_projection(len)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn eta_n(&self) -> &FunctionElement {
        &self.eta_n
    }

    fn exponent_parts(&self, z: Complex64, a: Complex64, xi: &FunctionElement) -> (Complex64, Complex64) {
        let rot = self.sector.rotation();
        let quad = -0.5 * z * z * rot * rot * self.eta_n_norm * self.eta_n_norm;
        let lin = Complex64::i() * rot * (z * inner_product(xi, &self.eta_n) - a);
        (quad, lin)
    }
}

/// The truncated contour integral
/// `(2π)^{-1} e^{-iα} ∫_{-n}^{n} exp(−½z²e^{−2iα}ν²|η_n|² + ie^{−iα}ν(z(ξ,η_n) − a)) dν`.
pub fn s_approximant(
    spec: &ApproximantSpec,
    z: Complex64,
    a: Complex64,
    xi: &FunctionElement,
) -> Result<Complex64> {
    spec.sector.require(z)?;
    let (quad, lin) = spec.exponent_parts(z, a, xi);
    let n = spec.n as f64;
    // Tolerance scales with the peak modulus of the integrand on [−n, n]; below that the
    // result is cancellation noise.
    let peak = [-n, n, (-lin.re / (2.0 * quad.re)).clamp(-n, n)]
        .iter()
        .map(|&nu| quad.re * nu * nu + lin.re * nu)
        .fold(0.0, f64::max)
        .exp();
    let q = QuadratureSpec {
        abs_tol: 1e-10 * peak,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    };
    let r = integrate_with_breaks(|nu| (quad * nu * nu + lin * nu).exp(), &[-n, 0.0, n], &q)?;
    Ok(r.value * spec.sector.rotation() / (2.0 * PI))
}

/// Upper bound on `|∫_{|ν|>n} …|/(2π)`, the part of the full contour integral cut off by the
/// approximant. With `c = ½Re(z²e^{−2iα})|η_n|²` and `b = |Im(e^{−iα}(z(ξ,η_n) − a))|` it is
/// `(1/π)∫_n^∞ e^{−cν² + bν} dν = (2π)^{-1} √(π/c) e^{b²/4c} erfc(√c (n − b/2c))`.
pub fn approximant_tail_bound(
    spec: &ApproximantSpec,
    z: Complex64,
    a: Complex64,
    xi: &FunctionElement,
) -> Result<f64> {
    spec.sector.require(z)?;
    let (quad, lin) = spec.exponent_parts(z, a, xi);
    let c = -quad.re;
    let b = lin.re.abs();
    let n = spec.n as f64;
    let arg = c.sqrt() * (n - b / (2.0 * c));
    let log_tail = b * b / (4.0 * c) + libm::erfc(arg).ln();
    Ok((PI / c).sqrt() / (2.0 * PI) * log_tail.exp())
}

/// Order-two constants valid for every approximant of a sequence whose `η_n` satisfy
/// `|η_n|₀² ≥ ½|η|₀²`: `K₁ = exp(2|a|²/(R|η|²)) / √(πR|η|²)`, `K₂ = |z|²/R` with
/// `R = Re(z²e^{−2iα})`.
pub fn approximant_sequence_certificate(
    sector: Sector,
    z: Complex64,
    a: Complex64,
    eta_norm: f64,
) -> Result<GrowthCertificate> {
    sector.require(z)?;
    let r = sector.decay_rate(z);
    let e2 = eta_norm * eta_norm;
    let k1 = (2.0 * a.norm_sqr() / (r * e2)).exp() / (PI * r * e2).sqrt();
    GrowthCertificate::order_two(k1, z.norm_sqr() / r, NormSpec::L2)
}

/// Packaged approximants `n ∈ cutoffs` as U-functionals with the uniform sequence certificate.
pub fn approximant_sequence(
    cutoffs: &[u32],
    sector: Sector,
    eta: &FunctionElement,
    z: Complex64,
    a: Complex64,
) -> Result<(Vec<UFunctional>, GrowthCertificate)> {
    let cert = approximant_sequence_certificate(sector, z, a, norm0(eta))?;
    let seq = cutoffs
        .iter()
        .map(|&n| {
            let spec = ApproximantSpec::packaged(n, sector, eta)?;
            Ok(UFunctional::new(TransformKind::S, cert, move |xi| {
                s_approximant(&spec, z, a, xi)
            }))
        })
        .collect::<Result<_>>()?;
    Ok((seq, cert))
}

/// `ln K₂ / (2 ln 2) + p + 1`: the distribution lies in `(S)_{-q}` for every larger `q`.
pub fn singularity_order(k2: f64, p: u32) -> Result<f64> {
    if !(k2 > 0.0 && k2.is_finite()) {
        return Err(Error::InvalidArgument(format!("K2 must be positive, got {k2}")));
    }
    Ok(k2.ln() / (2.0 * std::f64::consts::LN_2) + p as f64 + 1.0)
}

/// Checks `z_n ↦ Sσ_{z_n}δ` for convergence at the probes under the uniform bound with
/// `K₁ = sup_n K_{1,n}` (taken at `s = 1`).
pub fn scaling_continuity_check(
    d: &DonskerDelta,
    z_sequence: &[Complex64],
    probes: &[FunctionElement],
) -> Result<ConvergenceReport> {
    let members: Vec<DonskerDelta> = z_sequence
        .iter()
        .map(|&z| d.with(d.a, z))
        .collect::<Result<_>>()?;
    let mut k1: f64 = 0.0;
    for m in &members {
        k1 = k1.max(m.growth_certificate(1.0)?.k1);
    }
    let cert = GrowthCertificate::order_two(k1, 1.0, NormSpec::L2)?;
    let seq: Vec<UFunctional> = members
        .into_iter()
        .map(|m| UFunctional::new(TransformKind::S, cert, move |xi| s_scaled_delta(&m, xi)))
        .collect();
    check_sequence(&seq, probes, &cert)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaJson {
    eta: FunctionElement,
    a: [f64; 2],
    #[serde(default = "unit")]
    z: [f64; 2],
    #[serde(default)]
    alpha: f64,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

impl TryFrom<DeltaJson> for DonskerDelta {
    type Error = Error;
    fn try_from(v: DeltaJson) -> Result<Self> {
        Self::new(
            v.eta,
            Complex64::new(v.a[0], v.a[1]),
            Complex64::new(v.z[0], v.z[1]),
            Sector::new(v.alpha)?,
        )
    }
}

impl From<DonskerDelta> for DeltaJson {
    fn from(d: DonskerDelta) -> Self {
        Self {
            eta: d.eta,
            a: [d.a.re, d.a.im],
            z: [d.z.re, d.z.im],
            alpha: d.sector.alpha(),
        }
    }
}
