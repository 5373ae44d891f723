use hida_core::mc::{
    estimate_transform, jackknife, map_paths, richardson_weights, sample_pairings, simulate_paths, with_workers,
    CylinderFunctional, DEFAULT_EPSILONS,
};
use hida_core::ufunctional::characteristic_functional;
use hida_core::{inner_product, Complex64, FunctionElement, TransformKind};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ind(a: f64, b: f64) -> FunctionElement {
    FunctionElement::indicator(a, b).unwrap()
}

#[test]
fn richardson_weights_for_the_default_ladder() {
    let w = richardson_weights(&DEFAULT_EPSILONS).unwrap();
    for (got, want) in w.iter().zip([1.0 / 3.0, -2.0, 8.0 / 3.0]) {
        assert!((got - want).abs() < 1e-12, "{w:?}");
    }
    assert!(richardson_weights(&[0.1, 0.1]).is_err());
}

#[test]
fn pairing_covariance_follows_the_inner_product() {
    let family = vec![ind(0.0, 1.0), ind(0.0, 2.0), FunctionElement::hermite_real(&[0.5, -0.5]).unwrap()];
    let n = 1_000_000u64;
    let samples = sample_pairings(&family, n, 91).unwrap();
    for i in 0..3 {
        for j in 0..=i {
            let prods: Vec<Complex64> = samples.iter().map(|s| c(s.values[i] * s.values[j], 0.0)).collect();
            let est = jackknife(&prods).unwrap();
            let exact = inner_product(&family[i], &family[j]).re;
            assert!((est.re - exact).abs() < 4.0 * est.stderr + 1e-12, "({i},{j}) {est:?} vs {exact}");
        }
    }
}

#[test]
fn t_transform_of_one_is_the_characteristic_functional() {
    let one = |_: &[f64]| c(1.0, 0.0);
    let functional = CylinderFunctional { family: vec![], eval: &one };
    for xi in [ind(0.0, 1.0), FunctionElement::hermite_real(&[0.6, 0.2]).unwrap()] {
        let est = estimate_transform(TransformKind::T, &functional, &xi, 200_000, 92).unwrap();
        assert!(est.z_score(characteristic_functional(&xi)) < 4.0, "{est:?}");
        let s = estimate_transform(TransformKind::S, &functional, &xi, 200_000, 93).unwrap();
        assert!(s.z_score(c(1.0, 0.0)) < 4.0, "{s:?}");
    }
}

#[test]
fn wick_exponential_against_a_character() {
    // S(e^{i⟨·,ζ⟩})(ξ) = C(ζ) e^{i(ξ,ζ)}.
    let zeta = ind(0.0, 1.0);
    let xi = FunctionElement::hermite_real(&[0.3, 0.4]).unwrap();
    let character = |x: &[f64]| Complex64::from_polar(1.0, x[0]);
    let functional = CylinderFunctional { family: vec![zeta.clone()], eval: &character };
    let est = estimate_transform(TransformKind::S, &functional, &xi, 300_000, 94).unwrap();
    let exact = characteristic_functional(&zeta) * (Complex64::i() * inner_product(&xi, &zeta)).exp();
    assert!(est.z_score(exact) < 4.0, "{est:?} vs {exact}");
}

#[test]
fn complex_test_functions_are_supported() {
    let one = |_: &[f64]| c(1.0, 0.0);
    let functional = CylinderFunctional { family: vec![], eval: &one };
    let xi = FunctionElement::hermite(vec![c(0.3, 0.4)]).unwrap();
    let est = estimate_transform(TransformKind::T, &functional, &xi, 200_000, 95).unwrap();
    assert!(est.z_score(characteristic_functional(&xi)) < 4.0, "{est:?}");
}

#[test]
fn estimates_do_not_depend_on_the_worker_count() {
    let x2 = |x: &[f64]| c(x[0] * x[0], x[0]);
    let run = || {
        let functional = CylinderFunctional { family: vec![ind(0.0, 1.0)], eval: &x2 };
        estimate_transform(TransformKind::S, &functional, &ind(0.5, 1.0), 50_000, 96).unwrap()
    };
    let one = with_workers(1, run).unwrap();
    let two = with_workers(2, run).unwrap();
    let eight = with_workers(8, run).unwrap();
    assert_eq!(one, two);
    assert_eq!(one, eight);
    let paths = |w| with_workers(w, || simulate_paths(1.0, 16, 500, 97).unwrap()).unwrap();
    assert_eq!(paths(1), paths(8));
}

#[test]
fn simulated_paths_have_brownian_covariance() {
    let n = 200_000;
    let (s, t) = (0.25, 1.0);
    let values = map_paths(1.0, 8, n, 98, |b| (b[2], b[8])).unwrap();
    let var: Vec<Complex64> = values.iter().map(|(_, bt)| c(bt * bt, 0.0)).collect();
    let cov: Vec<Complex64> = values.iter().map(|(bs, bt)| c(bs * bt, 0.0)).collect();
    let v = jackknife(&var).unwrap();
    let k = jackknife(&cov).unwrap();
    assert!((v.re - t).abs() < 4.0 * v.stderr, "{v:?}");
    assert!((k.re - s).abs() < 4.0 * k.stderr, "{k:?}");
    let p = simulate_paths(1.0, 8, 1, 98).unwrap();
    assert_eq!(p[0].values[0], 0.0);
    assert_eq!(p[0].times.len(), 9);
    assert_eq!(p[0].values[8], values[0].1);
}
