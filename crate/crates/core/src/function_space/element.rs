use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hermite::hermite_interval_integrals;
use crate::error::{Error, Result};

/// Longest Hermite coefficient vector accepted by [`FunctionElement::hermite`].
pub const MAX_HERMITE_LEN: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An element of `L²(ℝ)` (complexified) in one of three exact representations.
///
/// Construction validates the invariants: indicators need `end > start`, Hermite spans are
/// bounded by [`MAX_HERMITE_LEN`], combinations are finite and non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementJson", into = "ElementJson")]
pub struct FunctionElement(Repr);

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Indicator { start: f64, end: f64 },
    Hermite(Vec<Complex64>),
    Combination(Vec<(Complex64, FunctionElement)>),
}

/// Borrowed view for matching on the representation.
#[derive(Debug, Clone, Copy)]
pub enum Variant<'a> {
    Indicator { start: f64, end: f64 },
    HermiteSpan(&'a [Complex64]),
    Combination(&'a [(Complex64, FunctionElement)]),
}

/// Flattened form: one Hermite vector plus weighted indicators.
#[derive(Debug, Clone, Default)]
pub(crate) struct Canonical {
    pub hermite: Vec<Complex64>,
    pub indicators: Vec<(Complex64, f64, f64)>,
}

impl Canonical {
    fn accumulate(&mut self, weight: Complex64, elem: &FunctionElement) {
        match &elem.0 {
            Repr::Indicator { start, end } => self.indicators.push((weight, *start, *end)),
            Repr::Hermite(c) => {
                if self.hermite.len() < c.len() {
                    self.hermite.resize(c.len(), ZERO);
                }
                for (h, ck) in self.hermite.iter_mut().zip(c) {
                    *h += weight * ck;
                }
            }
            Repr::Combination(terms) => {
                for (w, e) in terms {
                    self.accumulate(weight * w, e);
                }
            }
        }
    }
}

fn overlap(s1: f64, e1: f64, s2: f64, e2: f64) -> f64 {
    (e1.min(e2) - s1.max(s2)).max(0.0)
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

impl FunctionElement {
    pub fn indicator(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::InvalidElement("indicator endpoints must be finite".into()));
        }
        if end <= start {
            return Err(Error::InvalidElement(format!(
                "indicator needs end > start, got [{start}, {end}]"
            )));
        }
        Ok(Self(Repr::Indicator { start, end }))
    }

    /// `1_{[0,t]}`, the direction defining `B(t)`.
    pub fn brownian(t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        Self::indicator(0.0, t)
    }

    pub fn hermite(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() > MAX_HERMITE_LEN {
            return Err(Error::InvalidElement(format!(
                "Hermite span of length {} exceeds the limit {MAX_HERMITE_LEN}",
                coeffs.len()
            )));
        }
        if !coeffs.iter().copied().all(finite) {
            return Err(Error::InvalidElement("non-finite Hermite coefficient".into()));
        }
        Ok(Self(Repr::Hermite(coeffs)))
    }

    pub fn hermite_real(coeffs: &[f64]) -> Result<Self> {
        Self::hermite(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The Hermite basis function `e_k`.
    pub fn basis(k: usize) -> Self {
        let mut c = vec![ZERO; k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::hermite(c).expect("basis index within limits")
    }

    pub fn zero() -> Self {
        Self(Repr::Hermite(Vec::new()))
    }

    pub fn combination(terms: Vec<(Complex64, FunctionElement)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidElement("empty combination".into()));
        }
        if !terms.iter().all(|(w, _)| finite(*w)) {
            return Err(Error::InvalidElement("non-finite combination weight".into()));
        }
        Ok(Self(Repr::Combination(terms)))
    }

    pub fn variant(&self) -> Variant<'_> {
        match &self.0 {
            Repr::Indicator { start, end } => Variant::Indicator {
                start: *start,
                end: *end,
            },
            Repr::Hermite(c) => Variant::HermiteSpan(c),
            Repr::Combination(t) => Variant::Combination(t),
        }
    }

    /// `c · self`. Hermite spans are rescaled in place; other variants are wrapped.
    pub fn scale(&self, c: Complex64) -> Self {
        match &self.0 {
            Repr::Hermite(v) => Self(Repr::Hermite(v.iter().map(|x| x * c).collect())),
            _ => Self(Repr::Combination(vec![(c, self.clone())])),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `self + other`; two Hermite spans are merged coefficient-wise.
    pub fn add(&self, other: &Self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        match (&self.0, &other.0) {
            (Repr::Hermite(a), Repr::Hermite(b)) => {
                let n = a.len().max(b.len());
                let c = (0..n)
                    .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
                    .collect();
                Self(Repr::Hermite(c))
            }
            _ => Self(Repr::Combination(vec![(one, self.clone()), (one, other.clone())])),
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        match &self.0 {
            Repr::Indicator { .. } => self.clone(),
            Repr::Hermite(c) => Self(Repr::Hermite(c.iter().map(|x| x.conj()).collect())),
            Repr::Combination(t) => Self(Repr::Combination(
                t.iter().map(|(w, e)| (w.conj(), e.conj())).collect(),
            )),
        }
    }

    /// True when every coefficient and weight is real, i.e. the element is a real function.
    pub fn is_real(&self) -> bool {
        match &self.0 {
            Repr::Indicator { .. } => true,
            Repr::Hermite(c) => c.iter().all(|x| x.im == 0.0),
            Repr::Combination(t) => t.iter().all(|(w, e)| w.im == 0.0 && e.is_real()),
        }
    }

    pub fn contains_indicator(&self) -> bool {
        match &self.0 {
            Repr::Indicator { .. } => true,
            Repr::Hermite(_) => false,
            Repr::Combination(t) => t.iter().any(|(_, e)| e.contains_indicator()),
        }
    }

    pub(crate) fn canonical(&self) -> Canonical {
        let mut c = Canonical::default();
        c.accumulate(Complex64::new(1.0, 0.0), self);
        c
    }

    /// The bilinear pairing `(f, g) = ∫ f(t) g(t) dt` (no conjugation).
    pub fn inner(&self, other: &Self) -> Complex64 {
        inner_product(self, other)
    }

    /// `∫_0^t ξ(s) ds = (ξ, 1_{[0,t]})`.
    pub fn integral_to(&self, t: f64) -> Complex64 {
        let c = self.canonical();
        let mut acc = ZERO;
        for &(w, s, e) in &c.indicators {
            acc += w * overlap(s, e, 0.0, t);
        }
        if !c.hermite.is_empty() && t > 0.0 {
            let ints = hermite_interval_integrals(0.0, t, c.hermite.len());
            acc += c.hermite.iter().zip(&ints).map(|(h, i)| h * i).sum::<Complex64>();
        }
        acc
    }

    /// Coefficients `(e_k, self)` for `k < n`, as a Hermite span.
    pub fn hermite_projection(&self, n: usize) -> Result<Self> {
        let c = self.canonical();
        let mut coeffs: Vec<Complex64> = (0..n)
            .map(|k| c.hermite.get(k).copied().unwrap_or(ZERO))
            .collect();
        for &(w, s, e) in &c.indicators {
            for (ck, ik) in coeffs.iter_mut().zip(hermite_interval_integrals(s, e, n)) {
                *ck += w * ik;
            }
        }
        Self::hermite(coeffs)
    }
}

/// Bilinear L² pairing of two elements.
///
/// Indicator/indicator pairs use interval overlap, Hermite/Hermite pairs the coefficient dot
/// product, and mixed pairs the exact interval integrals of the Hermite functions.
/// Complex coefficients extend bilinearly, so `(f, g) = (g, f)` and `(f, f̄) = |f|₀²`.
pub fn inner_product(f: &FunctionElement, g: &FunctionElement) -> Complex64 {
    let cf = f.canonical();
    let cg = g.canonical();
    let mut acc: Complex64 = cf
        .hermite
        .iter()
        .zip(&cg.hermite)
        .map(|(a, b)| a * b)
        .sum();
    for &(w1, s1, e1) in &cf.indicators {
        for &(w2, s2, e2) in &cg.indicators {
            acc += w1 * w2 * overlap(s1, e1, s2, e2);
        }
    }
    let mixed = |ind: &[(Complex64, f64, f64)], herm: &[Complex64]| -> Complex64 {
        if herm.is_empty() {
            return ZERO;
        }
        ind.iter()
            .map(|&(w, s, e)| {
                let ints = hermite_interval_integrals(s, e, herm.len());
                w * herm.iter().zip(&ints).map(|(h, i)| h * i).sum::<Complex64>()
            })
            .sum()
    };
    acc + mixed(&cf.indicators, &cg.hermite) + mixed(&cg.indicators, &cf.hermite)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ElementJson {
    Indicator([f64; 2]),
    Hermite(Vec<[f64; 2]>),
    Combo(Vec<([f64; 2], ElementJson)>),
}

impl TryFrom<ElementJson> for FunctionElement {
    type Error = Error;

    fn try_from(value: ElementJson) -> Result<Self> {
        match value {
            ElementJson::Indicator([s, e]) => Self::indicator(s, e),
            ElementJson::Hermite(c) => {
                Self::hermite(c.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            }
            ElementJson::Combo(terms) => Self::combination(
                terms
                    .into_iter()
                    .map(|([re, im], e)| Ok((Complex64::new(re, im), Self::try_from(e)?)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

impl From<FunctionElement> for ElementJson {
    fn from(value: FunctionElement) -> Self {
        match value.0 {
            Repr::Indicator { start, end } => ElementJson::Indicator([start, end]),
            Repr::Hermite(c) => ElementJson::Hermite(c.into_iter().map(|z| [z.re, z.im]).collect()),
            Repr::Combination(t) => ElementJson::Combo(
                t.into_iter()
                    .map(|(w, e)| ([w.re, w.im], ElementJson::from(e)))
                    .collect(),
            ),
        }
    }
}
