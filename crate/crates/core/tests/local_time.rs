use hida_core::donsker::{s_scaled_delta, DonskerDelta};
use hida_core::local_time::{
    integrand, occupation_bias_bound, occupation_oracle, s_local_time, s_local_time_between, LocalTimeQuery,
};
use hida_core::quadrature::QuadratureSpec;
use hida_core::rng::{gaussian_hermite_probe, substream};
use hida_core::ufunctional::{integrate_family, FamilyCertificate};
use hida_core::{Complex64, Error, FunctionElement};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// 30-digit references for ∫₀ᵗ (2πs)^{-1/2} exp(−a²/2s) ds.
const L_1_1: f64 = 0.166630941175372596766125477135;
const L_3_2: f64 = 0.213104285476907990858792654392;
const L_1_COMPLEX: (f64, f64) = (0.144854568654449541778805212185, -0.0929956896863232227636194120504);

fn lt(t: f64, a: Complex64, xi: &FunctionElement) -> Complex64 {
    s_local_time(&LocalTimeQuery::new(t, a).unwrap(), xi, 1e-13).unwrap()
}

#[test]
fn frozen_values_at_zero() {
    let xi = FunctionElement::zero();
    assert!((lt(1.0, c(1.0, 0.0), &xi) - c(L_1_1, 0.0)).norm() < 1e-12);
    assert!((lt(3.0, c(2.0, 0.0), &xi) - c(L_3_2, 0.0)).norm() < 1e-12);
    assert!((lt(1.0, c(1.0, 0.3), &xi) - c(L_1_COMPLEX.0, L_1_COMPLEX.1)).norm() < 1e-12);
}

#[test]
fn reflected_offset_gives_the_same_value_at_zero() {
    let xi = FunctionElement::zero();
    let v = lt(1.0, c(-1.0, -0.3), &xi);
    assert!((v - c(L_1_COMPLEX.0, L_1_COMPLEX.1)).norm() < 1e-12);
}

#[test]
fn imaginary_offset_is_rejected() {
    assert!(matches!(LocalTimeQuery::new(1.0, c(0.0, 1.0)), Err(Error::DomainViolation(_))));
    assert!(matches!(LocalTimeQuery::new(1.0, c(1.0, 1.0)), Err(Error::DomainViolation(_))));
}

#[test]
fn additivity_in_time() {
    let mut r = substream(71, 0);
    for _ in 0..20 {
        let xi = gaussian_hermite_probe(&mut r, 6).unwrap().scale_real(0.5);
        let a = c(0.8, 0.2);
        let whole = s_local_time_between(a, &xi, 0.0, 2.0, 1e-13).unwrap();
        let left = s_local_time_between(a, &xi, 0.0, 0.7, 1e-13).unwrap();
        let right = s_local_time_between(a, &xi, 0.7, 2.0, 1e-13).unwrap();
        assert!((whole - left - right).norm() < 1e-10);
    }
}

#[test]
fn increasing_in_time_and_vanishing_at_zero_time() {
    let xi = FunctionElement::zero();
    let a = c(1.0, 0.0);
    let mut last = f64::INFINITY;
    for t in [1.0, 0.5, 0.1, 0.05, 0.01, 1e-3] {
        let v = lt(t, a, &xi).re;
        assert!(v < last && v >= 0.0);
        last = v;
    }
    assert!(last < 1e-200);
}

#[test]
fn integrand_is_the_brownian_delta() {
    let xi = FunctionElement::hermite_real(&[0.4, -0.3]).unwrap();
    for s in [0.1, 0.5, 2.0] {
        let d = DonskerDelta::brownian(s, c(0.7, 0.1)).unwrap();
        let v = integrand(s, c(0.7, 0.1), &xi);
        assert!((v - s_scaled_delta(&d, &xi).unwrap()).norm() < 1e-14);
    }
}

#[test]
fn agrees_with_generic_family_integration() {
    let q = LocalTimeQuery::new(1.5, c(0.9, 0.2)).unwrap();
    let k1 = move |s: f64| q.k1(s);
    let cert = FamilyCertificate { k1: &k1, k2_sup: 0.75 };
    let spec = QuadratureSpec::absolute(1e-12);
    for xi in [FunctionElement::zero(), FunctionElement::hermite_real(&[0.3, 0.1, -0.2]).unwrap()] {
        let generic = integrate_family(
            |s, x| s_scaled_delta(&DonskerDelta::brownian(s, q.a())?, x),
            (0.0, q.t()),
            |_| 1.0,
            &cert,
            &spec,
            &xi,
        )
        .unwrap();
        let direct = s_local_time(&q, &xi, 1e-13).unwrap();
        assert!((generic - direct).norm() < 1e-9, "{generic} vs {direct}");
    }
}

#[test]
fn occupation_time_estimate_is_consistent() {
    let (t, a, eps, steps) = (1.0, 1.0, 0.1, 1000);
    let est = occupation_oracle(t, a, eps, 20_000, steps, 72).unwrap();
    let bias = occupation_bias_bound(t, a, eps, steps).unwrap();
    let gap = (est.re - L_1_1).abs();
    assert!(gap < 3.0 * est.stderr + bias, "{est:?} bias {bias}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_in_the_offset(re in 0.5f64..1.5, im in -0.4f64..0.4) {
        let xi = FunctionElement::hermite_real(&[0.2, 0.1]).unwrap();
        let a = c(re, im);
        let h = 1e-3;
        let f = |a: Complex64| s_local_time(&LocalTimeQuery::new(1.0, a).unwrap(), &xi, 1e-12).unwrap();
        let d = |dir: Complex64| {
            let s = dir * h;
            (-f(a + s * 2.0) + f(a + s) * 8.0 - f(a - s) * 8.0 + f(a - s * 2.0)) / (12.0 * h)
        };
        let residual = (d(c(0.0, 1.0)) - Complex64::i() * d(c(1.0, 0.0))).norm();
        prop_assert!(residual < 1e-6, "{}", residual);
    }
}
