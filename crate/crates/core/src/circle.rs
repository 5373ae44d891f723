//! Particle on a circle: the free Feynman integrand `I₀`, smeared final states, the
//! T-transform of `I = I₀ F(B(t) + φ₀)` and the resulting propagator.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{inner_product, norm0, FunctionElement, Sector};
use crate::series::{partial_sum, period_theta_args, theta};

/// Largest admitted mode index `|l|`.
pub const MAX_MODE: i64 = 512;

/// `√i = e^{iπ/4}` on the principal branch.
pub fn sqrt_i() -> Complex64 {
    Complex64::from_polar(1.0, FRAC_PI_4)
}

/// `TI₀(ξ) = exp(−(i/2)(ξ, ξ))`.
pub fn t_free_integrand(xi: &FunctionElement) -> Complex64 {
    (Complex64::new(0.0, -0.5) * inner_product(xi, xi)).exp()
}

/// Final state `F(φ) = Σ_l a_l e^{ilφ}` with finitely many modes and the witness `s` of
/// `Σ_l |a_l| e^{½s²l²} < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    coeffs: BTreeMap<i64, Complex64>,
    s: f64,
}

impl WavePacket {
    pub fn new(coeffs: BTreeMap<i64, Complex64>, s: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("wave packet needs at least one mode".into()));
        }
        if let Some(l) = coeffs.keys().find(|l| l.abs() > MAX_MODE) {
            return Err(Error::InvalidArgument(format!("mode {l} exceeds |l| <= {MAX_MODE}")));
        }
        if coeffs.values().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite packet coefficient".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("witness s must be positive, got {s}")));
        }
        Ok(Self { coeffs, s })
    }

    pub fn from_modes(modes: &[(i64, Complex64)], s: f64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(l, a) in modes {
            *map.entry(l).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Self::new(map, s)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `Σ_l |a_l| e^{½s²l²}`.
    pub fn weight(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(l, a)| a.norm() * (0.5 * self.s * self.s * (*l as f64).powi(2)).exp())
            .sum()
    }

    /// `Σ_l |a_l|`, a bound on the propagator for every time.
    pub fn l1(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).sum()
    }

    /// `ψ(φ₀, t) = Σ_l a_l exp(−(i/2)l²t + ilφ₀)` for any `t ≥ 0`.
    pub fn propagate(&self, phi0: f64, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(l, a)| {
                let l = *l as f64;
                a * Complex64::from_polar(1.0, -0.5 * l * l * t + l * phi0)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct CircleState {
    phi0: f64,
    t: f64,
    packet: WavePacket,
}

impl CircleState {
    pub fn new(phi0: f64, t: f64, packet: WavePacket) -> Result<Self> {
        if !phi0.is_finite() {
            return Err(Error::InvalidArgument("phi0 must be finite".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        Ok(Self { phi0, t, packet })
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn packet(&self) -> &WavePacket {
        &self.packet
    }
}

/// `TI(ξ) = e^{−(i/2)(ξ,ξ)} Σ_l a_l exp(−(i/2)l²t + il(φ₀ − ∫₀ᵗξ))`.
pub fn t_circle(state: &CircleState, xi: &FunctionElement) -> Complex64 {
    let v = xi.integral_to(state.t);
    let sum: Complex64 = state
        .packet
        .coeffs
        .iter()
        .map(|(l, a)| {
            let l = *l as f64;
            a * (Complex64::i() * (-0.5 * l * l * state.t + l * (state.phi0 - v))).exp()
        })
        .sum();
    t_free_integrand(xi) * sum
}

/// `(Σ|a_l|e^{½s²l²}) e^{½(1 + t/s²)|ξ|₀²}`, the uniform bound on `|TI(ξ)|`, from
/// `|l||∫₀ᵗξ| ≤ |l|√t|ξ|₀ ≤ ½s²l² + t|ξ|₀²/2s²`.
pub fn uniform_bound(state: &CircleState, xi: &FunctionElement) -> f64 {
    let s = state.packet.s;
    let n = norm0(xi);
    state.packet.weight() * (0.5 * (1.0 + state.t / (s * s)) * n * n).exp()
}

/// `⟨⟨I, 1⟩⟩ = TI(0)`.
pub fn feynman_integral(state: &CircleState) -> Complex64 {
    state.packet.propagate(state.phi0, state.t)
}

/// The closed form of [`feynman_integral`], admitting the limit `t = 0`.
pub fn feynman_integral_at(packet: &WavePacket, phi0: f64, t: f64) -> Result<Complex64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    Ok(packet.propagate(phi0, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub phi0: f64,
    pub t: f64,
    pub psi_re: f64,
    pub psi_im: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub rows: Vec<ResidualRow>,
}

/// `|i∂_tψ + ½∂²_φψ|` at every grid point by centred differences of step `h`.
pub fn schroedinger_residual(
    packet: &WavePacket,
    phi0_grid: &[f64],
    t_grid: &[f64],
    h: f64,
) -> Result<ResidualReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::NonpositiveTime(*t));
    }
    let points: Vec<(f64, f64)> = phi0_grid
        .iter()
        .flat_map(|&p| t_grid.iter().map(move |&t| (p, t)))
        .collect();
    let rows: Vec<ResidualRow> = points
        .par_iter()
        .map(|&(p, t)| {
            let psi = |p: f64, t: f64| packet.propagate(p, t);
            let c = psi(p, t);
            let dt = (psi(p, t + h) - psi(p, (t - h).max(0.0))) / (t + h - (t - h).max(0.0));
            let dpp = (psi(p + h, t) - 2.0 * c + psi(p - h, t)) / (h * h);
            let r = Complex64::i() * dt + 0.5 * dpp;
            ResidualRow {
                phi0: p,
                t,
                psi_re: c.re,
                psi_im: c.im,
                residual: r.norm(),
            }
        })
        .collect();
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ResidualReport { max_residual, rows })
}

/// `n` equally spaced points of `[0, 2π)` and of `(0, T]`.
pub fn default_grids(n: usize, t_max: f64) -> (Vec<f64>, Vec<f64>) {
    let phi = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let t = (1..=n).map(|k| t_max * k as f64 / n as f64).collect();
    (phi, t)
}

/// Diagnosis for the strictly localized propagator `Σ_n I₀ δ(φ(t) − φ₁ + 2πn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub diverges: bool,
    /// The formal theta parameter `τ = iP²/(2πtz²)` at `z = √i`, `P = 2π`.
    pub formal_tau: [f64; 2],
    pub diagnosis: String,
    /// The same winding series without `I₀` (`z = 1`) converges.
    pub control_converges: bool,
    pub control_theta: Option<[f64; 2]>,
    /// Measured `n²`-coefficient of `ln|term_n|` for unit shifts at `z = √i`; zero means no
    /// decay.
    pub term_growth_exponent: f64,
}

pub fn localized_divergence_check(t: f64, phi1: f64, phi0: f64) -> Result<DivergenceReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    let a = Complex64::new(phi1 - phi0, 0.0);
    let zero = FunctionElement::zero();
    let z = sqrt_i();
    let formal_tau = Complex64::i() * 4.0 * PI * PI / (2.0 * PI * t * z * z);
    let (diverges, diagnosis) = match period_theta_args(z, t, a, 2.0 * PI, &zero) {
        Err(e @ Error::DivergentTheta(_)) => (true, e.to_string()),
        Err(e) => return Err(e),
        Ok(args) => (false, format!("theta arguments accepted: tau = {}", args.tau())),
    };
    let control = period_theta_args(Complex64::new(1.0, 0.0), t, a, 2.0 * PI, &zero)
        .and_then(|args| theta(args, 1e-16));
    let ps = partial_sum(z, t, a, Sector::new(FRAC_PI_8)?, 20, &zero)?;
    Ok(DivergenceReport {
        diverges,
        formal_tau: [formal_tau.re, formal_tau.im],
        diagnosis,
        control_converges: control.is_ok(),
        control_theta: control.ok().map(|v| [v.value.re, v.value.im]),
        term_growth_exponent: ps.measured_exponent,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    phi0: f64,
    t: f64,
    packet: BTreeMap<String, [f64; 2]>,
    s: f64,
}

impl TryFrom<StateJson> for CircleState {
    type Error = Error;
    fn try_from(v: StateJson) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, [re, im]) in v.packet {
            let l: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("packet key {k:?} is not an integer")))?;
            coeffs.insert(l, Complex64::new(re, im));
        }
        Self::new(v.phi0, v.t, WavePacket::new(coeffs, v.s)?)
    }
}

impl From<CircleState> for StateJson {
    fn from(c: CircleState) -> Self {
        Self {
            phi0: c.phi0,
            t: c.t,
            packet: c
                .packet
                .coeffs
                .iter()
                .map(|(l, a)| (l.to_string(), [a.re, a.im]))
                .collect(),
            s: c.packet.s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn free_integrand_examples() {
        assert_eq!(t_free_integrand(&FunctionElement::zero()), one());
        let v = t_free_integrand(&FunctionElement::basis(0));
        assert!((v - Complex64::from_polar(1.0, -0.5)).norm() < 1e-16);
    }

    #[test]
    fn packet_limits() {
        assert!(WavePacket::from_modes(&[(513, one())], 1.0).is_err());
        assert!(WavePacket::from_modes(&[], 1.0).is_err());
        assert!(WavePacket::from_modes(&[(1, one())], 0.0).is_err());
    }

    #[test]
    fn single_mode_at_t_pi() {
        let p = WavePacket::from_modes(&[(1, one())], 1.0).unwrap();
        let s = CircleState::new(0.0, PI, p).unwrap();
        let v = feynman_integral(&s);
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(t_circle(&s, &FunctionElement::zero()), v);
    }

    #[test]
    fn json_shape() {
        let s: CircleState =
            serde_json::from_str(r#"{"phi0":0.5,"t":1.0,"packet":{"1":[1.0,0.0],"-2":[0.0,0.3]},"s":1.0}"#)
                .unwrap();
        assert_eq!(s.packet().coeffs().len(), 2);
        let back: CircleState = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<CircleState>(r#"{"phi0":0.5,"t":1.0,"packet":{"x":[1.0,0.0]},"s":1.0}"#).is_err());
    }
}
