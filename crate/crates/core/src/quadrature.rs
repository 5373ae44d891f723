//! Globally adaptive Gauss–Kronrod (10/21) quadrature for complex-valued integrands.
//!
//! The error estimate per cell follows the QUADPACK convention: the raw Kronrod/Gauss
//! difference is rescaled by the integrand's absolute variation so that smooth integrands
//! are not over-refined. Cells are bisected in order of decreasing error until the total
//! estimate meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_704_245,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and budget for an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn absolute(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_nodes(a: f64, b: f64) -> [f64; 21] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut x = [0.0; 21];
    for j in 0..10 {
        x[2 * j] = center - half * XGK[j];
        x[2 * j + 1] = center + half * XGK[j];
    }
    x[20] = center;
    x
}

fn kronrod_cell(a: f64, b: f64, f: &[Complex64; 21]) -> Result<Cell> {
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let center_val = f[20];
    let mut res_k = center_val * WGK[10];
    let mut res_g = Complex64::new(0.0, 0.0);
    let mut res_abs = center_val.norm() * WGK[10];
    for j in 0..10 {
        let (lo, hi) = (f[2 * j], f[2 * j + 1]);
        res_k += (lo + hi) * WGK[j];
        res_abs += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (lo + hi) * WG[j / 2];
        }
    }
    if !(res_k.re.is_finite() && res_k.im.is_finite()) {
        return Err(Error::QuadratureFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (center_val - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((f[2 * j] - mean).norm() + (f[2 * j + 1] - mean).norm());
    }
    let res_asc = res_asc * abs_half;
    let res_abs = res_abs * abs_half;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * res_abs;
    if roundoff > f64::MIN_POSITIVE {
        err = err.max(roundoff);
    }
    Ok(Cell {
        a,
        b,
        value: res_k * half,
        error: err,
    })
}

trait NodeEval {
    fn eval(&self, x: &[f64; 21]) -> [Complex64; 21];
}

struct Serial<F>(F);
impl<F: Fn(f64) -> Complex64> NodeEval for Serial<F> {
    fn eval(&self, x: &[f64; 21]) -> [Complex64; 21] {
        let mut out = [Complex64::new(0.0, 0.0); 21];
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = (self.0)(xi);
        }
        out
    }
}

struct Parallel<F>(F);
impl<F: Fn(f64) -> Complex64 + Sync> NodeEval for Parallel<F> {
    fn eval(&self, x: &[f64; 21]) -> [Complex64; 21] {
        let vals: Vec<Complex64> = x.par_iter().map(|&xi| (self.0)(xi)).collect();
        let mut out = [Complex64::new(0.0, 0.0); 21];
        out.copy_from_slice(&vals);
        out
    }
}

fn adaptive<E: NodeEval>(f: &E, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral> {
    if breaks.len() < 2 || breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "integration range needs at least two finite points".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let x = kronrod_nodes(w[0], w[1]);
        heap.push(kronrod_cell(w[0], w[1], &f.eval(&x))?);
        evaluations += 21;
    }
    let total = |heap: &BinaryHeap<Cell>| {
        heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), c| {
            (v + c.value, e + c.error)
        })
    };
    let (mut value, mut error) = total(&heap);
    let mut subdivisions = heap.len();
    while error > spec.target(value) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureFailure(format!(
                "subdivision budget {} exhausted (error estimate {error:e}, target {:e})",
                spec.max_subdivisions,
                spec.target(value)
            )));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::QuadratureFailure(format!(
                "interval [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        let left = kronrod_cell(worst.a, mid, &f.eval(&kronrod_nodes(worst.a, mid)))?;
        let right = kronrod_cell(mid, worst.b, &f.eval(&kronrod_nodes(mid, worst.b)))?;
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Incremental sums drift; resynchronise occasionally.
        if subdivisions % 64 == 0 {
            (value, error) = total(&heap);
        }
    }
    let (value, error) = total(&heap);
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    adaptive(&Serial(f), &[a, b], spec)
}

/// Integrates `f` over consecutive segments of `breaks`, refining all of them jointly.
pub fn integrate_with_breaks<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    adaptive(&Serial(f), breaks, spec)
}

/// Same as [`integrate_with_breaks`] but evaluates the 21 nodes of each cell on the rayon
/// pool. Results are identical to the serial version for any pool size.
pub fn integrate_parallel<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    adaptive(&Parallel(f), breaks, spec)
}

pub fn integrate_real<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, spec).map(|r| r.value.re)
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + (1 - u) / u`, `u ∈ (0, 1]`.
pub fn integrate_semi_infinite<F>(f: F, a: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let g = |u: f64| {
        if u <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let x = a + (1.0 - u) / u;
        let v = f(x);
        if v == Complex64::new(0.0, 0.0) {
            v
        } else {
            v / (u * u)
        }
    };
    adaptive(&Serial(g), &[0.0, 1.0], spec)
}
