//! U-functionals: transforms of Hida distributions treated as black-box evaluators, plus
//! numerical checkers for the characterization criteria (order-two growth, convergence of
//! sequences, parameter integrals, minimal type for test functionals).

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{inner_product, norm, FunctionElement, NormSign, NormSpec};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rng;

pub type Evaluator = Arc<dyn Fn(&FunctionElement) -> Result<Complex64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    S,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStyle {
    /// `|F(zξ)| ≤ K₁ exp(K₂ |z|² |ξ|²)`
    OrderTwo,
    /// Additionally `|F(zξ)| ≤ K₁ exp(ε |z|² |ξ|²_{-p})` for every ε in the configured list.
    MinimalType,
}

/// A falsifiable claim about the growth of a functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub k1: f64,
    pub k2: f64,
    pub norm: NormSpec,
    pub style: BoundStyle,
}

impl GrowthCertificate {
    pub fn order_two(k1: f64, k2: f64, norm: NormSpec) -> Result<Self> {
        Self::new(k1, k2, norm, BoundStyle::OrderTwo)
    }

    pub fn new(k1: f64, k2: f64, norm: NormSpec, style: BoundStyle) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "growth constants must be positive and finite, got K1={k1}, K2={k2}"
            )));
        }
        Ok(Self { k1, k2, norm, style })
    }

    /// `ln K₁ + K₂ s²` where `s = |z| |ξ|`.
    pub fn log_bound(&self, scaled_norm: f64) -> f64 {
        self.k1.ln() + self.k2 * scaled_norm * scaled_norm
    }
}

#[derive(Clone)]
pub struct UFunctional {
    evaluator: Evaluator,
    certificate: GrowthCertificate,
    kind: TransformKind,
}

impl std::fmt::Debug for UFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UFunctional")
            .field("certificate", &self.certificate)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl UFunctional {
    pub fn new<F>(kind: TransformKind, certificate: GrowthCertificate, f: F) -> Self
    where
        F: Fn(&FunctionElement) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            certificate,
            kind,
        }
    }

    pub fn eval(&self, xi: &FunctionElement) -> Result<Complex64> {
        (self.evaluator)(xi)
    }

    pub fn certificate(&self) -> &GrowthCertificate {
        &self.certificate
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn with_certificate(mut self, certificate: GrowthCertificate) -> Self {
        self.certificate = certificate;
        self
    }

    /// `T1 = C`, the T-transform of the constant test functional 1.
    pub fn characteristic() -> Self {
        let cert = GrowthCertificate::order_two(1.0, 0.5, NormSpec::L2).expect("valid constants");
        Self::new(TransformKind::T, cert, |xi| Ok(characteristic_functional(xi)))
    }
}

/// `C(ξ) = exp(−½ (ξ, ξ))`, extended bilinearly to complex ξ.
pub fn characteristic_functional(xi: &FunctionElement) -> Complex64 {
    (-0.5 * inner_product(xi, xi)).exp()
}

/// `SΦ(ξ) = C(ξ) TΦ(−iξ)`.
pub fn s_from_t(t: &UFunctional, xi: &FunctionElement) -> Result<Complex64> {
    let rotated = xi.scale(Complex64::new(0.0, -1.0));
    Ok(characteristic_functional(xi) * t.eval(&rotated)?)
}

/// `TΦ(ξ) = SΦ(iξ) / C(iξ)`, the inverse of [`s_from_t`].
pub fn t_from_s(s: &UFunctional, xi: &FunctionElement) -> Result<Complex64> {
    let rotated = xi.scale(Complex64::new(0.0, 1.0));
    Ok(s.eval(&rotated)? / characteristic_functional(&rotated))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cauchy_max_gap: f64,
    pub bound_violations: u64,
    pub verdict: bool,
}

/// Probe distribution for growth checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCheckConfig {
    pub max_probe_len: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub epsilons: Vec<f64>,
    /// Slack in log space absorbing rounding at the bound (equality cases).
    pub log_slack: f64,
}

impl Default for GrowthCheckConfig {
    fn default() -> Self {
        Self {
            max_probe_len: 16,
            z_min: 1e-2,
            z_max: 8.0,
            epsilons: vec![1.0, 0.1, 0.01],
            log_slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub trials: u64,
    pub order_two_violations: u64,
    /// `(ε, violations)` for the minimal-type test; empty for order-two certificates.
    pub minimal_type_violations: Vec<(f64, u64)>,
    /// Largest `ln|F(zξ)| − log_bound` seen in the order-two test.
    pub worst_log_excess: f64,
}

impl GrowthReport {
    pub fn total_violations(&self) -> u64 {
        self.order_two_violations + self.minimal_type_violations.iter().map(|(_, v)| v).sum::<u64>()
    }
}

/// Samples random Hermite probes `ξ` and scalings `z` and counts violations of `cert`.
pub fn verify_growth_bound(
    f: &UFunctional,
    cert: &GrowthCertificate,
    trials: u64,
    seed: u64,
) -> Result<ConvergenceReport> {
    let r = verify_growth_bound_with(f, cert, trials, seed, &GrowthCheckConfig::default())?;
    let violations = r.total_violations();
    Ok(ConvergenceReport {
        cauchy_max_gap: 0.0,
        bound_violations: violations,
        verdict: violations == 0,
    })
}

pub fn verify_growth_bound_with(
    f: &UFunctional,
    cert: &GrowthCertificate,
    trials: u64,
    seed: u64,
    config: &GrowthCheckConfig,
) -> Result<GrowthReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let dual = NormSpec {
        p: cert.norm.p,
        sign: NormSign::Dual,
    };
    let per_trial: Vec<(bool, Vec<bool>, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut r = rng::substream(seed, i);
            let xi = rng::gaussian_hermite_probe(&mut r, config.max_probe_len)?;
            let z = rng::log_uniform_complex(&mut r, config.z_min, config.z_max);
            let value = f.eval(&xi.scale(z))?;
            let log_abs = value.norm().ln();
            let scaled = z.norm() * norm(&xi, cert.norm)?;
            let bound = cert.log_bound(scaled);
            // An overflowed value is only a violation if the bound itself is representable.
            let excess = if log_abs.is_nan() {
                f64::INFINITY
            } else if log_abs == f64::INFINITY && bound >= f64::MAX.ln() {
                0.0
            } else {
                log_abs - bound
            };
            let order_two_bad = excess > config.log_slack;
            let minimal_bad = if cert.style == BoundStyle::MinimalType {
                let s = z.norm() * norm(&xi, dual)?;
                config
                    .epsilons
                    .iter()
                    .map(|eps| log_abs.is_nan() || log_abs > cert.k1.ln() + eps * s * s + config.log_slack)
                    .collect()
            } else {
                Vec::new()
            };
            Ok((order_two_bad, minimal_bad, excess))
        })
        .collect::<Result<_>>()?;
    let order_two_violations = per_trial.iter().filter(|t| t.0).count() as u64;
    let worst_log_excess = per_trial.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
    let minimal_type_violations = if cert.style == BoundStyle::MinimalType {
        config
            .epsilons
            .iter()
            .enumerate()
            .map(|(j, &eps)| (eps, per_trial.iter().filter(|t| t.1[j]).count() as u64))
            .collect()
    } else {
        Vec::new()
    };
    Ok(GrowthReport {
        trials,
        order_two_violations,
        minimal_type_violations,
        worst_log_excess,
    })
}

/// Settings for [`check_sequence_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCheckConfig {
    /// Index of the first gap from which gaps must be non-increasing.
    pub monotone_from: usize,
    /// The final gap must fall below `rel_tol` times the first monitored gap...
    pub rel_tol: f64,
    /// ...or below this absolute floor.
    pub abs_tol: f64,
    /// Scalings `z` at which the uniform bound is tested for every member and probe.
    pub scalings: Vec<Complex64>,
}

impl Default for SequenceCheckConfig {
    fn default() -> Self {
        Self {
            monotone_from: 0,
            rel_tol: 0.1,
            abs_tol: 1e-12,
            scalings: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 2.0),
            ],
        }
    }
}

/// Numerical version of the sequence convergence criterion: pointwise Cauchy behaviour at
/// every probe plus one uniform order-two bound for all members.
pub fn check_sequence(
    seq: &[UFunctional],
    probes: &[FunctionElement],
    cert: &GrowthCertificate,
) -> Result<ConvergenceReport> {
    check_sequence_with(seq, probes, cert, &SequenceCheckConfig::default())
}

pub fn check_sequence_with(
    seq: &[UFunctional],
    probes: &[FunctionElement],
    cert: &GrowthCertificate,
    config: &SequenceCheckConfig,
) -> Result<ConvergenceReport> {
    if seq.len() < 3 {
        return Err(Error::InvalidArgument(
            "sequence check needs at least 3 members".into(),
        ));
    }
    if probes.is_empty() {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    // values[probe][member]
    let values: Vec<Vec<Complex64>> = probes
        .par_iter()
        .map(|xi| seq.iter().map(|f| f.eval(xi)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = (0..seq.len() - 1)
        .map(|k| {
            values
                .iter()
                .map(|v| (v[k + 1] - v[k]).norm())
                .fold(0.0, f64::max)
        })
        .collect();

    let violations: u64 = probes
        .par_iter()
        .map(|xi| -> Result<u64> {
            let base = norm(xi, cert.norm)?;
            let mut count = 0;
            for f in seq {
                for &z in &config.scalings {
                    let v = f.eval(&xi.scale(z))?.norm();
                    let bound = cert.log_bound(z.norm() * base);
                    if !(v.ln() <= bound + 1e-9) {
                        count += 1;
                    }
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let tail = &gaps[config.monotone_from.min(gaps.len() - 1)..];
    let monotone = tail
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + config.abs_tol);
    let last = *tail.last().expect("non-empty tail");
    let first = tail[0];
    let cauchy = last <= config.abs_tol.max(config.rel_tol * first);
    Ok(ConvergenceReport {
        cauchy_max_gap: last,
        bound_violations: violations,
        verdict: violations == 0 && monotone && cauchy,
    })
}

/// Declared integrability data for a parameter family `λ ↦ Φ(λ)`: the bound
/// `|F(λ, zξ)| ≤ K₁(λ) exp(K₂(λ)|z|²|ξ|²)` with `K₁ ∈ L¹(m)` and `sup K₂ < ∞`.
pub struct FamilyCertificate<'a> {
    pub k1: &'a (dyn Fn(f64) -> f64 + Sync),
    pub k2_sup: f64,
}

/// `∫ F(λ, ξ) dm(λ)` over `domain` with `dm = density(λ) dλ`, after checking that the
/// declared `K₁` is integrable and `K₂` bounded.
pub fn integrate_family<F, D>(
    f: F,
    domain: (f64, f64),
    density: D,
    certificate: &FamilyCertificate<'_>,
    spec: &QuadratureSpec,
    xi: &FunctionElement,
) -> Result<Complex64>
where
    F: Fn(f64, &FunctionElement) -> Result<Complex64>,
    D: Fn(f64) -> f64,
{
    if !(certificate.k2_sup.is_finite() && certificate.k2_sup > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "K2 must be bounded, got sup K2 = {}",
            certificate.k2_sup
        )));
    }
    let k1_mass = integrate(
        |l| Complex64::new((certificate.k1)(l) * density(l), 0.0),
        domain.0,
        domain.1,
        &QuadratureSpec {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_subdivisions: spec.max_subdivisions,
        },
    )
    .map_err(|e| Error::QuadratureFailure(format!("declared K1 is not integrable: {e}")))?;
    if !k1_mass.value.re.is_finite() {
        return Err(Error::QuadratureFailure("declared K1 is not integrable".into()));
    }
    integrate_fallible(|l| Ok(f(l, xi)? * density(l)), &[domain.0, domain.1], spec)
}

/// Runs the adaptive quadrature on an integrand that may fail; the first evaluator error
/// aborts the integration and is returned unchanged.
pub(crate) fn integrate_fallible<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let result = crate::quadrature::integrate_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        },
        breaks,
        spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map(|r| r.value)
}

/// Largest Cauchy–Riemann residual `|∂_y g − i ∂_x g|` of `g(λ) = F(λξ + ζ)` over a 3×3 grid
/// in `[-½, ½]²`, with 4th-order central differences of step `h`.
pub fn ray_analyticity_residual(
    f: &UFunctional,
    xi: &FunctionElement,
    zeta: &FunctionElement,
    h: f64,
) -> Result<f64> {
    let g = |l: Complex64| f.eval(&xi.scale(l).add(zeta));
    let d = |l: Complex64, dir: Complex64| -> Result<Complex64> {
        let s = dir * h;
        Ok((-g(l + s * 2.0)? + g(l + s)? * 8.0 - g(l - s)? * 8.0 + g(l - s * 2.0)?) / (12.0 * h))
    };
    let mut worst: f64 = 0.0;
    for i in -1..=1 {
        for j in -1..=1 {
            let l = Complex64::new(0.5 * i as f64, 0.5 * j as f64);
            let dx = d(l, Complex64::new(1.0, 0.0))?;
            let dy = d(l, Complex64::new(0.0, 1.0))?;
            worst = worst.max((dy - Complex64::i() * dx).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_one() -> UFunctional {
        let cert = GrowthCertificate::order_two(1.0, 1.0, NormSpec::L2).unwrap();
        UFunctional::new(TransformKind::S, cert, |_| Ok(Complex64::new(1.0, 0.0)))
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(characteristic_functional(&FunctionElement::zero()), Complex64::new(1.0, 0.0));
        let e0 = characteristic_functional(&FunctionElement::basis(0));
        assert!((e0.re - (-0.5f64).exp()).abs() < 1e-16);
        let ind = FunctionElement::indicator(0.0, 4.0).unwrap();
        assert!((characteristic_functional(&ind).re - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn s_of_t1_is_one() {
        let c = UFunctional::characteristic();
        let xi = FunctionElement::hermite_real(&[0.3, -1.2, 0.7]).unwrap();
        assert!((s_from_t(&c, &xi).unwrap() - 1.0).norm() < 1e-14);
        let zero = FunctionElement::zero();
        assert_eq!(s_from_t(&c, &zero).unwrap(), c.eval(&zero).unwrap());
    }

    #[test]
    fn constant_functional_never_violates() {
        let f = constant_one();
        let r = verify_growth_bound(&f, f.certificate(), 500, 3).unwrap();
        assert_eq!(r.bound_violations, 0);
        assert!(r.verdict);
    }

    #[test]
    fn characteristic_functional_is_not_of_minimal_type() {
        let c = UFunctional::characteristic();
        let cert = GrowthCertificate::new(1.0, 0.5, NormSpec::L2, BoundStyle::MinimalType).unwrap();
        let r = verify_growth_bound_with(&c, &cert, 2000, 5, &GrowthCheckConfig::default()).unwrap();
        assert_eq!(r.order_two_violations, 0);
        let at_tenth = r.minimal_type_violations.iter().find(|(e, _)| *e == 0.1).unwrap();
        assert!(at_tenth.1 > 0);
    }

    #[test]
    fn growth_check_is_reproducible_under_any_pool_size() {
        let c = UFunctional::characteristic();
        let cert = GrowthCertificate::new(1.0, 0.5, NormSpec::L2, BoundStyle::MinimalType).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| verify_growth_bound_with(&c, &cert, 300, 9, &GrowthCheckConfig::default()))
                .unwrap()
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sequence_checks() {
        let probes = vec![
            FunctionElement::basis(0),
            FunctionElement::hermite_real(&[0.2, -0.5, 1.0]).unwrap(),
        ];
        let c = UFunctional::characteristic();
        let cert = *c.certificate();
        let constant = vec![c.clone(), c.clone(), c.clone(), c.clone()];
        assert!(check_sequence(&constant, &probes, &cert).unwrap().verdict);

        let growing: Vec<UFunctional> = (1..=5)
            .map(|n| {
                UFunctional::new(TransformKind::T, cert, move |xi| {
                    Ok(characteristic_functional(xi) * n as f64)
                })
            })
            .collect();
        let r = check_sequence(&growing, &probes, &cert).unwrap();
        assert!(!r.verdict);
        assert!(r.bound_violations > 0);

        assert!(check_sequence(&constant[..2], &probes, &cert).is_err());
    }

    #[test]
    fn family_integral_of_constant_in_lambda() {
        let xi = FunctionElement::hermite_real(&[0.5, 0.5]).unwrap();
        let k1 = |_l: f64| 1.0;
        let cert = FamilyCertificate { k1: &k1, k2_sup: 0.5 };
        let v = integrate_family(
            |_l, xi| Ok(characteristic_functional(xi)),
            (0.0, 1.0),
            |_| 1.0,
            &cert,
            &QuadratureSpec::default(),
            &xi,
        )
        .unwrap();
        assert!((v - characteristic_functional(&xi)).norm() < 1e-14);
    }

    #[test]
    fn family_with_essential_singularity_at_zero() {
        // K1(λ) = λ^{-1/2} e^{-1/(2λ)}; with u = 1/λ the mass on (0,1] is ∫_1^∞ u^{-3/2} e^{-u/2} du.
        let k1 = |l: f64| l.powf(-0.5) * (-0.5 / l).exp();
        let cert = FamilyCertificate { k1: &k1, k2_sup: 1.0 };
        let xi = FunctionElement::zero();
        let v = integrate_family(
            |l, _| Ok(Complex64::new(k1(l), 0.0)),
            (0.0, 1.0),
            |_| 1.0,
            &cert,
            &QuadratureSpec::default(),
            &xi,
        )
        .unwrap();
        let by_substitution = crate::quadrature::integrate_semi_infinite(
            |u| Complex64::new(u.powf(-1.5) * (-u / 2.0).exp(), 0.0),
            1.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((v - by_substitution.value).norm() < 1e-11, "{v} vs {:?}", by_substitution.value);
    }

    #[test]
    fn unbounded_k2_is_rejected() {
        let k1 = |_l: f64| 1.0;
        let cert = FamilyCertificate { k1: &k1, k2_sup: f64::INFINITY };
        let r = integrate_family(
            |_, _| Ok(Complex64::new(1.0, 0.0)),
            (0.0, 1.0),
            |_| 1.0,
            &cert,
            &QuadratureSpec::default(),
            &FunctionElement::zero(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn characteristic_functional_is_ray_entire() {
        let c = UFunctional::characteristic();
        let xi = FunctionElement::hermite_real(&[0.4, -0.3]).unwrap();
        let zeta = FunctionElement::hermite_real(&[0.1, 0.2, 0.3]).unwrap();
        assert!(ray_analyticity_residual(&c, &xi, &zeta, 1e-3).unwrap() < 1e-6);
    }

    #[test]
    fn report_json_fields() {
        let r = ConvergenceReport {
            cauchy_max_gap: 0.5,
            bound_violations: 2,
            verdict: false,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"cauchy_max_gap":0.5,"bound_violations":2,"verdict":false}"#);
    }
}
