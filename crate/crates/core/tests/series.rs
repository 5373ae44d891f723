use std::f64::consts::PI;

use hida_core::rng::{gaussian_hermite_probe, log_uniform_complex, substream};
use hida_core::series::{
    partial_sum, period_theta_args, s_series, s_series_detailed, series_tail_bound, series_truncation, theta,
    DeltaSeries, ThetaArgs,
};
use hida_core::{Complex64, Error, FunctionElement, Sector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// 30-digit references.
const THETA_0_I: f64 = 1.08643481121330801457531612151;
const WRAPPED_NORMAL_03: f64 = 0.999999998346581091821694918739;

#[test]
fn theta_at_the_origin_of_the_imaginary_axis() {
    let v = theta(ThetaArgs::new(c(0.0, 0.0), c(0.0, 1.0)).unwrap(), 1e-17).unwrap();
    assert!((v.value - c(THETA_0_I, 0.0)).norm() < 1e-15);
}

#[test]
fn theta_quasi_periodicity() {
    let (rho, tau) = (c(0.23, 0.1), c(0.3, 0.8));
    let th = |r: Complex64| theta(ThetaArgs::new(r, tau).unwrap(), 1e-17).unwrap().value;
    assert!((th(rho + 1.0) - th(rho)).norm() < 1e-13);
    let shifted = th(rho + tau);
    let expected = th(rho) * (-Complex64::i() * PI * tau - 2.0 * PI * Complex64::i() * rho).exp();
    assert!((shifted - expected).norm() < 1e-12 * expected.norm());
}

#[test]
fn theta_rejects_closed_upper_half_plane_complement() {
    assert!(matches!(ThetaArgs::new(c(0.0, 0.0), c(1.0, 0.0)), Err(Error::DivergentTheta(_))));
    assert!(matches!(ThetaArgs::new(c(0.0, 0.0), c(0.0, -1.0)), Err(Error::DivergentTheta(_))));
}

#[test]
fn wrapped_normal_at_unit_scaling() {
    let d = DeltaSeries::new(c(1.0, 0.0), 1.0, c(0.3, 0.0)).unwrap();
    let v = s_series(&d, &FunctionElement::zero()).unwrap();
    assert!((v - c(WRAPPED_NORMAL_03, 0.0)).norm() < 1e-14, "{v}");
}

#[test]
fn theta_form_equals_direct_sum_with_tail_bound() {
    let cases = [
        (Complex64::from_polar(2.0, PI / 8.0), 1.0, c(0.2, 0.1)),
        (Complex64::from_polar(1.5, -0.5), 0.7, c(-0.4, 0.0)),
        (c(1.0, 0.0), 2.0, c(0.0, 0.3)),
    ];
    let xi = FunctionElement::hermite_real(&[0.3, -0.1]).unwrap();
    for (z, t, a) in cases {
        let d = DeltaSeries::new(z, t, a).unwrap();
        let full = s_series(&d, &xi).unwrap();
        for n in [5u64, 10, 20] {
            let part = partial_sum(z, t, a, Sector::principal(), n, &xi).unwrap();
            let gap = (full - part.value).norm();
            let bound = series_tail_bound(&d, &xi, n).unwrap();
            assert!(gap <= bound + 1e-14 * full.norm(), "z={z} N={n}: gap {gap} bound {bound}");
            assert!(!part.divergent);
        }
    }
}

#[test]
fn truncation_formula_is_sufficient() {
    let z = Complex64::from_polar(2.0, PI / 8.0);
    let d = DeltaSeries::new(z, 1.0, c(0.1, 0.0)).unwrap();
    let xi = FunctionElement::zero();
    let full = s_series(&d, &xi).unwrap();
    for tol in [1e-4, 1e-8] {
        let n = series_truncation(&d, tol).unwrap();
        let part = partial_sum(z, 1.0, c(0.1, 0.0), Sector::principal(), n, &xi).unwrap();
        assert!((full - part.value).norm() < tol * full.norm().max(1.0) * 10.0);
    }
}

#[test]
fn series_domain_is_the_principal_sector() {
    let mut r = substream(61, 0);
    for _ in 0..10_000 {
        let z = log_uniform_complex(&mut r, 1e-2, 1e2);
        let inside = z.arg().abs() < PI / 4.0;
        let ok = DeltaSeries::new(z, 1.0, c(0.0, 0.0));
        if inside {
            let d = ok.unwrap_or_else(|e| panic!("{z}: {e}"));
            assert!(d.decay() > 0.0);
        } else {
            assert!(matches!(ok, Err(Error::DivergentTheta(_)) | Err(Error::SectorViolation { .. })), "{z}");
        }
    }
}

#[test]
fn sqrt_i_is_rejected_with_a_clear_message() {
    let z = Complex64::from_polar(1.0, PI / 4.0);
    let e = DeltaSeries::new(z, 1.0, c(0.0, 0.0)).unwrap_err();
    assert!(e.to_string().contains("outside S_0"), "{e}");
    assert!(period_theta_args(z, 1.0, c(0.0, 0.0), 1.0, &FunctionElement::zero()).is_err());
}

#[test]
fn partial_sums_at_sqrt_i_do_not_decay() {
    let z = Complex64::from_polar(1.0, PI / 4.0);
    let sector = Sector::new(PI / 8.0).unwrap();
    let xi = FunctionElement::zero();
    let first = partial_sum(z, 1.0, c(0.0, 0.0), sector, 10, &xi).unwrap();
    assert!(first.divergent);
    assert!(first.growth_exponent >= -1e-12);
    assert!(first.measured_exponent.abs() < 1e-10);
    // At t = 1/4π every term equals 1/(z√(2πt)), so |S_N| = (2N + 1)/√(2πt).
    let t = 1.0 / (4.0 * PI);
    let mut last = 0.0;
    for n in 0..=30u64 {
        let v = partial_sum(z, t, c(0.0, 0.0), sector, n, &xi).unwrap().value.norm();
        assert!((v - (2 * n + 1) as f64 / (2.0 * PI * t).sqrt()).abs() < 1e-9 * v);
        assert!(v > last);
        last = v;
    }
}

#[test]
fn partial_sum_of_order_zero_is_the_single_delta() {
    let z = Complex64::from_polar(1.3, 0.2);
    let a = c(0.4, -0.1);
    let xi = FunctionElement::hermite_real(&[0.2, 0.5]).unwrap();
    let p = partial_sum(z, 1.5, a, Sector::principal(), 0, &xi).unwrap();
    let d = hida_core::donsker::DonskerDelta::new(FunctionElement::brownian(1.5).unwrap(), a, z, Sector::principal())
        .unwrap();
    assert_eq!(p.value, hida_core::donsker::s_scaled_delta(&d, &xi).unwrap());
    assert_eq!(p.measured_exponent, 0.0);
}

#[test]
fn series_is_one_periodic_in_the_offset() {
    let mut r = substream(62, 0);
    for _ in 0..50 {
        let xi = gaussian_hermite_probe(&mut r, 4).unwrap().scale_real(0.5);
        let z = Complex64::from_polar(1.2, 0.3);
        let d0 = DeltaSeries::new(z, 1.0, c(0.2, 0.1)).unwrap();
        let d1 = DeltaSeries::new(z, 1.0, c(1.2, 0.1)).unwrap();
        let (v0, n0) = s_series_detailed(&d0, &xi).unwrap();
        let v1 = s_series(&d1, &xi).unwrap();
        assert!(n0 > 0);
        // The terms δ(zB(t) − a + n) are reindexed by a ↦ a + 1.
        assert!((v0 - v1).norm() < 1e-11 * v0.norm().max(1.0), "{v0} vs {v1}");
    }
}
