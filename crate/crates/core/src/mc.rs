//! Monte Carlo ground truth: correlated Gaussian pairings `⟨ω, f_j⟩`, Brownian paths, and
//! estimators of S- and T-transforms of cylinder functionals.
//!
//! Sample `i` always draws from [`rng::substream`]`(seed, i)` and results are collected in
//! index order before any reduction, so estimates are bit-identical for every worker count.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{inner_product, FunctionElement};
use crate::products::{gram, GramMatrix};
use crate::rng::{self, standard_normal};
use crate::ufunctional::{characteristic_functional, TransformKind};

/// Number of jackknife blocks.
pub const JACKKNIFE_BLOCKS: usize = 100;

/// A complex Monte Carlo estimate; `stderr` is the jackknife error of the complex mean,
/// `√(σ²_re + σ²_im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `|value − x| / stderr`.
    pub fn z_score(&self, x: Complex64) -> f64 {
        (self.value() - x).norm() / self.stderr
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// `f(rng_i, i)` for `i < n`, evaluated in parallel and returned in index order.
pub fn map_samples<T, F>(n: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, i);
            f(&mut r, i)
        })
        .collect()
}

/// Pairwise (cascade) summation; the result depends only on the order of `v`.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean and leave-one-block-out jackknife standard error over [`JACKKNIFE_BLOCKS`] contiguous
/// blocks.
pub fn jackknife(values: &[Complex64]) -> Result<Estimate> {
    let n = values.len();
    if n < 2 * JACKKNIFE_BLOCKS {
        return Err(Error::InvalidArgument(format!(
            "jackknife needs at least {} samples, got {n}",
            2 * JACKKNIFE_BLOCKS
        )));
    }
    let b = JACKKNIFE_BLOCKS;
    let bounds: Vec<usize> = (0..=b).map(|k| k * n / b).collect();
    let block_sums: Vec<Complex64> = (0..b).map(|k| pairwise_sum(&values[bounds[k]..bounds[k + 1]])).collect();
    let total = pairwise_sum(&block_sums);
    let mean = total / n as f64;
    let loo: Vec<Complex64> = (0..b)
        .map(|k| (total - block_sums[k]) / (n - (bounds[k + 1] - bounds[k])) as f64)
        .collect();
    let loo_mean = pairwise_sum(&loo) / b as f64;
    let var: f64 = loo.iter().map(|x| (x - loo_mean).norm_sqr()).sum::<f64>() * (b as f64 - 1.0) / b as f64;
    Ok(Estimate {
        re: mean.re,
        im: mean.im,
        stderr: var.sqrt(),
    })
}

/// Lower-triangular `L` with `L Lᵀ = M` for a positive semidefinite `M`. Columns whose pivot
/// falls below `rel_tol` times the diagonal entry are zeroed (the variable is a linear
/// combination of the preceding ones).
pub fn semidefinite_cholesky(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= rel_tol * m[(j, j)].abs() || d <= 0.0 {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    l
}

/// Jointly Gaussian sample of `(⟨ω, f_1⟩, …, ⟨ω, f_n⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSample {
    pub values: Vec<f64>,
}

/// Draws pairings of a fixed family through the Cholesky factor of its Gram matrix.
#[derive(Debug, Clone)]
pub struct PairingSampler {
    gram: GramMatrix,
    factor: DMatrix<f64>,
}

impl PairingSampler {
    pub fn new(family: &[FunctionElement]) -> Result<Self> {
        let gram = gram(family)?;
        let factor = gram.cholesky_factor();
        Ok(Self { gram, factor })
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        draw_with(&self.factor, rng)
    }
}

fn draw_with(factor: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = factor.nrows();
    let z = DVector::from_iterator(n, (0..n).map(|_| standard_normal(rng)));
    (factor * z).iter().copied().collect()
}

pub fn sample_pairings(family: &[FunctionElement], n: u64, seed: u64) -> Result<Vec<PairingSample>> {
    let sampler = PairingSampler::new(family)?;
    Ok(map_samples(n, seed, |r, _| PairingSample {
        values: sampler.draw(r),
    }))
}

/// Real and imaginary parts of `ξ` as real elements.
fn real_parts(xi: &FunctionElement) -> (FunctionElement, FunctionElement) {
    let conj = xi.conj();
    let re = xi.add(&conj).scale_real(0.5);
    let im = xi.add(&conj.scale_real(-1.0)).scale(Complex64::new(0.0, -0.5));
    (re, im)
}

/// A functional of finitely many pairings `⟨ω, f_j⟩`.
pub struct CylinderFunctional<'a> {
    pub family: Vec<FunctionElement>,
    pub eval: &'a (dyn Fn(&[f64]) -> Complex64 + Sync),
}

/// Estimates `TΦ(ξ) = E[Φ e^{i⟨ω,ξ⟩}]` or `SΦ(ξ) = E[Φ :e^{⟨ω,ξ⟩}:]` with
/// `:e^{⟨ω,ξ⟩}: = C(ξ) e^{⟨ω,ξ⟩}`.
///
/// The real and imaginary parts of `ξ` are appended to the family; any part that is a linear
/// combination of the family is reproduced exactly through a semidefinite factorization.
pub fn estimate_transform(
    kind: TransformKind,
    functional: &CylinderFunctional<'_>,
    xi: &FunctionElement,
    n: u64,
    seed: u64,
) -> Result<Estimate> {
    let k = functional.family.len();
    if k > 0 {
        gram(&functional.family)?;
    }
    let (xr, xi_im) = real_parts(xi);
    let mut all = functional.family.clone();
    all.push(xr);
    all.push(xi_im);
    let m = all.len();
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = inner_product(&all[i], &all[j]).re;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let factor = semidefinite_cholesky(&cov, 1e-12);
    let wick = characteristic_functional(xi);
    let values = map_samples(n, seed, |r, _| {
        let x = draw_with(&factor, r);
        let pair = Complex64::new(x[k], x[k + 1]);
        let weight = match kind {
            TransformKind::T => (Complex64::i() * pair).exp(),
            TransformKind::S => wick * pair.exp(),
        };
        (functional.eval)(&x[..k]) * weight
    });
    jackknife(&values)
}

/// Gaussian mollifier `δ_ε(x) = (2πε)^{-1/2} e^{−x²/2ε}`; `ε` is the variance.
pub fn mollifier(eps: f64, x: f64) -> f64 {
    (-x * x / (2.0 * eps)).exp() / (2.0 * std::f64::consts::PI * eps).sqrt()
}

/// Weights `w` with `Σ w_j = 1` and `Σ w_j ε_jᵏ = 0` for `1 ≤ k < len`, cancelling the
/// polynomial bias of a mollified estimator in `ε`.
pub fn richardson_weights(eps: &[f64]) -> Result<Vec<f64>> {
    let n = eps.len();
    if n == 0 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("mollifier widths must be positive".into()));
    }
    let a = DMatrix::from_fn(n, n, |k, j| eps[j].powi(k as i32));
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    let w = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("mollifier widths must be distinct".into()))?;
    Ok(w.iter().copied().collect())
}

/// Default extrapolation ladder.
pub const DEFAULT_EPSILONS: [f64; 3] = [0.1, 0.05, 0.025];

/// `Σ_j w_j δ_{ε_j}(x)` for precomputed Richardson weights.
pub fn extrapolated_mollifier(eps: &[f64], weights: &[f64], x: f64) -> f64 {
    eps.iter().zip(weights).map(|(e, w)| w * mollifier(*e, x)).sum()
}

/// Brownian motion sampled on `t_k = kT/steps`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn path_values(t: f64, steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd = (t / steps as f64).sqrt();
    let mut v = Vec::with_capacity(steps + 1);
    let mut b = 0.0;
    v.push(b);
    for _ in 0..steps {
        b += sd * standard_normal(rng);
        v.push(b);
    }
    v
}

fn check_grid(t: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    Ok(())
}

pub fn simulate_paths(t: f64, steps: usize, n: u64, seed: u64) -> Result<Vec<BrownianPath>> {
    check_grid(t, steps)?;
    let times: Vec<f64> = (0..=steps).map(|k| t * k as f64 / steps as f64).collect();
    Ok(map_samples(n, seed, |r, _| BrownianPath {
        times: times.clone(),
        values: path_values(t, steps, r),
    }))
}

/// Applies `f` to each path's values without keeping the paths.
pub fn map_paths<T, F>(t: f64, steps: usize, n: u64, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    check_grid(t, steps)?;
    Ok(map_samples(n, seed, |r, _| f(&path_values(t, steps, r))))
}
