//! Products `Π_j σ_z δ(⟨·, f_j⟩ − a_j)` of scaled Donsker deltas through the Gram matrix of the
//! directions `f_j`, with a contour-quadrature oracle for the underlying `λ`-integral.

use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{inner_product, FunctionElement, Sector};
use crate::quadrature::{integrate, integrate_parallel, QuadratureSpec};
use crate::ufunctional::characteristic_functional;

/// Relative condition number above which a Gram matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Positive-definite matrix `M_{kl} = (f_k, f_l)` of real directions, held with its
/// Cholesky factor.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
    condition: f64,
}

impl PartialEq for GramMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl GramMatrix {
    /// Validates and factorizes a symmetric matrix. Conditioning is measured on the
    /// diagonally rescaled (correlation) matrix so that it does not depend on the lengths of
    /// the directions.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidArgument("Gram matrix must be square and non-empty".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Gram matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
                }
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| entries[(i, i)]).collect();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::SingularGram {
                condition: f64::INFINITY,
            });
        }
        let corr = DMatrix::from_fn(n, n, |i, j| entries[(i, j)] / (diag[i] * diag[j]).sqrt());
        let eig = corr.symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularGram { condition });
        }
        let cholesky = Cholesky::new(entries.clone()).ok_or(Error::SingularGram { condition })?;
        Ok(Self {
            entries,
            cholesky,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[(k, l)]
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Lower-triangular `L` with `M = L Lᵀ`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.cholesky.l()
    }

    pub fn determinant(&self) -> f64 {
        self.cholesky.determinant()
    }

    /// `M⁻¹ v` for complex `v`, through the Cholesky factor.
    pub fn solve(&self, v: &[Complex64]) -> Vec<Complex64> {
        let re = self.cholesky.solve(&DVector::from_iterator(v.len(), v.iter().map(|c| c.re)));
        let im = self.cholesky.solve(&DVector::from_iterator(v.len(), v.iter().map(|c| c.im)));
        re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// The bilinear form `vᵀ M⁻¹ v` (no conjugation).
    pub fn inverse_form(&self, v: &[Complex64]) -> Complex64 {
        v.iter().zip(self.solve(v)).map(|(a, b)| a * b).sum()
    }
}

/// Gram matrix of real, linearly independent directions.
pub fn gram(f: &[FunctionElement]) -> Result<GramMatrix> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("at least one direction is required".into()));
    }
    if let Some(k) = f.iter().position(|e| !e.is_real()) {
        return Err(Error::InvalidElement(format!("direction {k} is not a real function")));
    }
    let n = f.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = inner_product(&f[i], &f[j]).re;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    GramMatrix::from_matrix(m)
}

/// `Π_j σ_z δ(⟨·, f_j⟩ − a_j)` with a common scaling `z ∈ S_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductJson", into = "ProductJson")]
pub struct DeltaProduct {
    z: Complex64,
    factors: Vec<(FunctionElement, Complex64)>,
    sector: Sector,
    gram: GramMatrix,
}

impl DeltaProduct {
    pub fn new(z: Complex64, factors: Vec<(FunctionElement, Complex64)>, sector: Sector) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("a product needs at least one factor".into()));
        }
        if factors.iter().any(|(_, a)| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidArgument("offsets must be finite".into()));
        }
        sector.require(z)?;
        let f: Vec<FunctionElement> = factors.iter().map(|(f, _)| f.clone()).collect();
        let gram = gram(&f)?;
        Ok(Self {
            z,
            factors,
            sector,
            gram,
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn factors(&self) -> &[(FunctionElement, Complex64)] {
        &self.factors
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    fn pairings(&self, xi: &FunctionElement) -> Vec<Complex64> {
        self.factors.iter().map(|(f, _)| inner_product(f, xi)).collect()
    }

    /// `(2π)^{-n/2} z^{-n} (det M)^{-1/2}`; `(z²)^{n/2}` is read as `zⁿ`.
    fn prefactor(&self) -> Complex64 {
        let n = self.len() as i32;
        self.z.powi(-n) * (2.0 * PI).powf(-0.5 * n as f64) / self.gram.determinant().sqrt()
    }
}

/// `SΦ(ξ) = z^{-n}(2π)^{-n/2}(det M)^{-1/2} exp(−½ vᵀM⁻¹v)`, `v = (f⃗, ξ) − a⃗/z`.
pub fn s_product(p: &DeltaProduct, xi: &FunctionElement) -> Result<Complex64> {
    let v: Vec<Complex64> = p
        .pairings(xi)
        .into_iter()
        .zip(&p.factors)
        .map(|(b, (_, a))| b - a / p.z)
        .collect();
    Ok(p.prefactor() * (-0.5 * p.gram.inverse_form(&v)).exp())
}

/// `TΦ(ξ) = z^{-n}(2π)^{-n/2}(det M)^{-1/2} exp(−½(ξ,ξ) + ½ uᵀM⁻¹u)`, `u = (f⃗, ξ) + i a⃗/z`,
/// the Gaussian integral over `λ` evaluated in closed form.
pub fn t_product(p: &DeltaProduct, xi: &FunctionElement) -> Result<Complex64> {
    let u: Vec<Complex64> = p
        .pairings(xi)
        .into_iter()
        .zip(&p.factors)
        .map(|(b, (_, a))| b + Complex64::i() * a / p.z)
        .collect();
    let xx = inner_product(xi, xi);
    Ok(p.prefactor() * (-0.5 * xx + 0.5 * p.gram.inverse_form(&u)).exp())
}

/// Largest product dimension the quadrature oracle accepts.
pub const ORACLE_MAX_DIM: usize = 3;

/// The contour integral `(2π)^{-n} e^{-iαn} ∫_{ℝⁿ} exp(−½ w² λᵀMλ + i e^{-iα} λ·(z b − a)) dⁿλ`
/// with `w = z e^{-iα}`, by iterated adaptive quadrature.
///
/// At pairings `b = (f⃗, ξ)` this is the S-transform of the product; at `b = i(f⃗, ξ)` it is
/// `e^{½(ξ,ξ)}` times the T-transform. The box is centred on the maximum of the integrand's
/// modulus and extends nine marginal standard deviations, which leaves a relative tail below
/// `e^{-40}`. Fails with `QuadratureFailure` when `Re(w²) ≤ 0`, where the integral diverges.
pub fn lambda_integral(
    m: &GramMatrix,
    b: &[Complex64],
    a: &[Complex64],
    z: Complex64,
    sector: Sector,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let n = m.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle supports at most {ORACLE_MAX_DIM} factors, got {n}"
        )));
    }
    if b.len() != n || a.len() != n {
        return Err(Error::InvalidArgument("pairing and offset vectors must match M".into()));
    }
    let rot = sector.rotation();
    let w = z * rot;
    let c = (w * w).re;
    if !(c > 0.0) || z == Complex64::new(0.0, 0.0) {
        return Err(Error::QuadratureFailure(format!(
            "Gaussian contour integral diverges: Re(z^2 e^(-2i alpha)) = {c:e}"
        )));
    }
    let quad = -0.5 * w * w;
    let lin: Vec<Complex64> = (0..n).map(|k| Complex64::i() * rot * (z * b[k] - a[k])).collect();

    // |integrand| = exp(−½c λᵀMλ + Re(lin)·λ), a Gaussian with mean (cM)⁻¹Re(lin).
    let g: Vec<Complex64> = lin.iter().map(|l| Complex64::new(l.re / c, 0.0)).collect();
    let mean: Vec<f64> = m.solve(&g).iter().map(|x| x.re).collect();
    let minv_diag: Vec<f64> = (0..n)
        .map(|k| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[k] = Complex64::new(1.0, 0.0);
            m.solve(&e)[k].re
        })
        .collect();
    let half_width: Vec<f64> = minv_diag.iter().map(|d| 9.0 * (d / c).sqrt()).collect();
    let boxes: Vec<(f64, f64)> = (0..n).map(|k| (mean[k] - half_width[k], mean[k] + half_width[k])).collect();

    let entries = m.entries().clone();
    let exponent = |lam: &[f64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += entries[(i, j)] * lam[j];
            }
            acc += quad * lam[i] * row + lin[i] * lam[i];
        }
        acc
    };

    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-2,
        rel_tol: spec.rel_tol * 1e-2,
        max_subdivisions: spec.max_subdivisions,
    };
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let record = |e: Error| {
        failure.lock().expect("unpoisoned").get_or_insert(e);
        Complex64::new(f64::NAN, f64::NAN)
    };

    // Integrates over the coordinates after `prefix`, which holds the fixed leading ones.
    fn nested<E: Fn(&[f64]) -> Complex64>(
        exponent: &E,
        boxes: &[(f64, f64)],
        prefix: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<Complex64> {
        let depth = prefix.len();
        let (lo, hi) = boxes[depth];
        let mut point = [0.0; ORACLE_MAX_DIM];
        point[..depth].copy_from_slice(prefix);
        let err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
        let r = integrate(
            |x| {
                let mut p = point;
                p[depth] = x;
                if depth + 1 == boxes.len() {
                    return exponent(&p[..=depth]).exp();
                }
                match nested(exponent, boxes, &p[..=depth], spec) {
                    Ok(v) => v,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        Complex64::new(f64::NAN, f64::NAN)
                    }
                }
            },
            lo,
            hi,
            spec,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        r.map(|r| r.value)
    }

    let (lo, hi) = boxes[0];
    let outer = integrate_parallel(
        |x| {
            if n == 1 {
                return exponent(&[x]).exp();
            }
            match nested(&exponent, &boxes, &[x], &inner_spec) {
                Ok(v) => v,
                Err(e) => record(e),
            }
        },
        &[lo, mean[0], hi],
        spec,
    );
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    let value = outer?.value;
    Ok(value * rot.powi(n as i32) / (2.0 * PI).powi(n as i32))
}

/// `TΦ(ξ)` from its defining `λ`-integral
/// `(2π)^{-n}e^{-iαn} e^{-½(ξ,ξ)} ∫ exp(−½w²λᵀMλ − wλ·(f⃗,ξ) − ie^{-iα}λ·a⃗) dⁿλ`.
pub fn t_product_oracle(p: &DeltaProduct, xi: &FunctionElement, spec: &QuadratureSpec) -> Result<Complex64> {
    // −wλ·b = i e^{-iα} λ·(z (i b)), so the T-integrand is the generic one at pairings i·b.
    let b: Vec<Complex64> = p.pairings(xi).into_iter().map(|b| Complex64::i() * b).collect();
    let a: Vec<Complex64> = p.factors.iter().map(|(_, a)| *a).collect();
    let integral = lambda_integral(&p.gram, &b, &a, p.z, p.sector, spec)?;
    Ok((-0.5 * inner_product(xi, xi)).exp() * integral)
}

/// `SΦ(ξ) = C(ξ) TΦ(−iξ)` with `T` from [`t_product_oracle`].
pub fn s_product_oracle(p: &DeltaProduct, xi: &FunctionElement, spec: &QuadratureSpec) -> Result<Complex64> {
    let rotated = xi.scale(Complex64::new(0.0, -1.0));
    Ok(characteristic_functional(xi) * t_product_oracle(p, &rotated, spec)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorJson {
    f: FunctionElement,
    a: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductJson {
    z: [f64; 2],
    #[serde(default)]
    alpha: f64,
    factors: Vec<FactorJson>,
}

impl TryFrom<ProductJson> for DeltaProduct {
    type Error = Error;
    fn try_from(v: ProductJson) -> Result<Self> {
        Self::new(
            Complex64::new(v.z[0], v.z[1]),
            v.factors
                .into_iter()
                .map(|f| (f.f, Complex64::new(f.a[0], f.a[1])))
                .collect(),
            Sector::new(v.alpha)?,
        )
    }
}

impl From<DeltaProduct> for ProductJson {
    fn from(p: DeltaProduct) -> Self {
        Self {
            z: [p.z.re, p.z.im],
            alpha: p.sector.alpha(),
            factors: p
                .factors
                .into_iter()
                .map(|(f, a)| FactorJson { f, a: [a.re, a.im] })
                .collect(),
        }
    }
}
