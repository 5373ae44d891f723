//! Randomized verification suites behind `hida verify`.

use clap::ValueEnum;
use hida_core::donsker::{approximant_tail_bound, s_approximant, s_scaled_delta, ApproximantSpec, DonskerDelta};
use hida_core::rng::{gaussian_hermite_probe, log_uniform_complex, sector_point, substream};
use hida_core::series::DeltaSeries;
use hida_core::ufunctional::{s_from_t, verify_growth_bound};
use hida_core::{norm, Complex64, Error, FunctionElement, NormSpec, Result, Sector};
use rand::Rng;

use crate::report::VerifyReport;

/// Relative gap above which an identity check counts as a violation.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Allowance for quadrature error in the approximant tail check, relative to `max(1, |limit|)`.
pub const QUADRATURE_SLACK: f64 = 1e-9;
/// Growth checks are split over this many random deltas.
const GROWTH_DELTAS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Sσ_zδ(⟨·,η⟩ − a) = z⁻¹ Sδ(⟨·,η⟩ − a/z).
    Homogeneity,
    /// Order-two growth certificates of random scaled deltas.
    Growth,
    /// S recovered from T through C(ξ)T(−iξ).
    RoundTrip,
    /// Approximant gaps stay under their tail bounds.
    Approximant,
    /// The delta series is accepted exactly on S_0.
    SeriesDomain,
    /// Scaled deltas are accepted exactly on the sector.
    Sector,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn c_offset(r: &mut impl Rng) -> Complex64 {
    c(r.random_range(-2.0..2.0), r.random_range(-1.0..1.0))
}

fn rel_gap(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

fn random_delta(r: &mut impl Rng, alpha: f64) -> Result<DonskerDelta> {
    let z = sector_point(r, alpha, 0.3, 3.0);
    let eta = FunctionElement::brownian(r.random_range(0.2..3.0))?;
    DonskerDelta::new(eta, c_offset(r), z, Sector::new(alpha)?)
}

pub fn run(suite: Suite, trials: u64, seed: u64) -> Result<VerifyReport> {
    let mut worst: f64 = 0.0;
    let mut violations = 0u64;
    let mut r = substream(seed, 0);
    match suite {
        Suite::Homogeneity => {
            for _ in 0..trials {
                let d = random_delta(&mut r, 0.0)?;
                let xi = gaussian_hermite_probe(&mut r, 6)?.scale_real(0.5);
                let unit = d.with(d.a() / d.z(), c(1.0, 0.0))?;
                let gap = rel_gap(s_scaled_delta(&d, &xi)?, s_scaled_delta(&unit, &xi)? / d.z());
                worst = worst.max(gap);
                violations += u64::from(!(gap <= IDENTITY_TOL));
            }
        }
        Suite::Growth => {
            let per = trials.div_ceil(GROWTH_DELTAS);
            let mut left = trials;
            for k in 0..GROWTH_DELTAS.min(trials) {
                let alpha = r.random_range(-0.5..0.5);
                let d = random_delta(&mut r, alpha)?;
                let f = d.s_functional(1.0)?;
                let n = per.min(left);
                left -= n;
                violations += verify_growth_bound(&f, f.certificate(), n, seed.wrapping_add(k + 1))?.bound_violations;
            }
        }
        Suite::RoundTrip => {
            for _ in 0..trials {
                let d = random_delta(&mut r, 0.0)?;
                let xi = gaussian_hermite_probe(&mut r, 8)?.scale_real(0.5);
                let gap = rel_gap(s_from_t(&d.t_functional(1.0)?, &xi)?, s_scaled_delta(&d, &xi)?);
                worst = worst.max(gap);
                violations += u64::from(!(gap <= IDENTITY_TOL));
            }
        }
        Suite::Approximant => {
            for _ in 0..trials {
                // A Hermite direction of length ≤ 4 is its own projection for every n ≥ 2, so
                // the gap is pure contour truncation.
                let alpha = r.random_range(-0.5..0.5);
                let z = sector_point(&mut r, alpha, 0.5, 2.0);
                let probe = gaussian_hermite_probe(&mut r, 4)?;
                let eta = probe.scale_real(0.5 / norm(&probe, NormSpec::L2)?);
                let d = DonskerDelta::new(eta, c_offset(&mut r), z, Sector::new(alpha)?)?;
                let xi = gaussian_hermite_probe(&mut r, 4)?.scale_real(0.3);
                let n = [2, 4, 8][r.random_range(0..3)];
                let spec = ApproximantSpec::packaged(n, d.sector(), d.eta())?;
                let limit = s_scaled_delta(&d, &xi)?;
                let scale = limit.norm().max(1.0);
                let gap = (s_approximant(&spec, d.z(), d.a(), &xi)? - limit).norm();
                let bound = approximant_tail_bound(&spec, d.z(), d.a(), &xi)?;
                worst = worst.max(gap / scale);
                violations += u64::from(!(gap <= bound + QUADRATURE_SLACK * scale));
            }
        }
        Suite::SeriesDomain => {
            for _ in 0..trials {
                let z = log_uniform_complex(&mut r, 1e-2, 8.0);
                let expected = Sector::principal().contains(z)?;
                let accepted = match DeltaSeries::new(z, 1.0, c(0.3, 0.0)) {
                    Ok(_) => true,
                    Err(Error::DivergentTheta(_)) => false,
                    Err(e) => return Err(e),
                };
                violations += u64::from(accepted != expected);
            }
        }
        Suite::Sector => {
            for _ in 0..trials {
                let alpha = r.random_range(-0.78..0.78);
                let sector = Sector::new(alpha)?;
                let z = log_uniform_complex(&mut r, 1e-2, 8.0);
                let expected = sector.contains(z)?;
                let accepted = match DonskerDelta::new(FunctionElement::basis(0), c(0.1, 0.0), z, sector) {
                    Ok(_) => true,
                    Err(Error::SectorViolation { .. }) => false,
                    Err(e) => return Err(e),
                };
                let w = z * sector.rotation();
                let sign_ok = w.re <= 0.0 || sector.sign_test(z) == expected;
                violations += u64::from(accepted != expected || !sign_ok);
            }
        }
    }
    Ok(VerifyReport {
        suite: suite.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default(),
        trials,
        seed,
        cauchy_max_gap: worst,
        bound_violations: violations,
        verdict: violations == 0,
    })
}
