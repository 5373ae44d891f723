//! Counter-based random substreams.
//!
//! Every random object (a probe, a Monte Carlo sample, a Brownian path) draws from its own
//! ChaCha stream selected by `(seed, index)`. Results therefore never depend on how the index
//! range is split across worker threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::function_space::FunctionElement;

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Hermite span with `1..=max_len` standard Gaussian coefficients.
pub fn gaussian_hermite_probe<R: Rng>(rng: &mut R, max_len: usize) -> Result<FunctionElement> {
    let len = rng.random_range(1..=max_len);
    let coeffs: Vec<f64> = (0..len).map(|_| standard_normal(rng)).collect();
    FunctionElement::hermite_real(&coeffs)
}

/// Complex scalar with log-uniform modulus in `[r_min, r_max]` and uniform phase.
pub fn log_uniform_complex<R: Rng>(rng: &mut R, r_min: f64, r_max: f64) -> Complex64 {
    let r = rng.random_range(r_min.ln()..=r_max.ln()).exp();
    Complex64::from_polar(r, rng.random_range(-PI..PI))
}

/// Uniform point of the open sector of half-width `π/4` around angle `alpha`.
pub fn sector_point<R: Rng>(rng: &mut R, alpha: f64, r_min: f64, r_max: f64) -> Complex64 {
    let r = rng.random_range(r_min.ln()..=r_max.ln()).exp();
    let half = 0.999 * PI / 4.0;
    Complex64::from_polar(r, alpha + rng.random_range(-half..half))
}
