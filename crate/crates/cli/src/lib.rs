//! `hida` command-line front end.

pub mod error;
pub mod output;
pub mod parse;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hida_core::circle::{
    default_grids, localized_divergence_check, schroedinger_residual, t_circle, uniform_bound,
    CircleState, WavePacket,
};
use hida_core::donsker::{
    approximant_tail_bound, s_approximant, s_delta, s_scaled_delta, singularity_order, t_delta, t_scaled_delta,
    ApproximantSpec, DonskerDelta,
};
use hida_core::local_time::{
    occupation_bias_bound, occupation_oracle, s_local_time, s_local_time_between, LocalTimeQuery,
};
use hida_core::mc::{
    estimate_transform, extrapolated_mollifier, richardson_weights, with_workers, CylinderFunctional, Estimate,
    DEFAULT_EPSILONS,
};
use hida_core::products::{s_product, s_product_oracle, t_product, t_product_oracle, DeltaProduct};
use hida_core::quadrature::QuadratureSpec;
use hida_core::series::{partial_sum, s_series_detailed, series_tail_bound, series_tail_constant, theta, DeltaSeries, ThetaArgs};
use hida_core::{Complex64, FunctionElement, Sector, TransformKind};
use serde::Deserialize;

use crate::error::{CliError, EXIT_OK, EXIT_VERDICT};
use crate::output::{emit, Axes, Format, Output, Table};
use crate::parse::{parse_list, parse_modes, read_payload, Cplx, Xi};
use crate::report::{pair, CertificateReport, OracleReport, TableReport, ThetaReport, ValueReport};

#[derive(Debug, Parser)]
#[command(name = "hida", version, about = "Evaluate S- and T-transforms of Donsker delta functionals")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "HIDA_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    S,
    T,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sδ(B(t) − a)(ξ) or its T-transform.
    Delta(DeltaArgs),
    /// Complex-scaled delta δ(z⟨ω,η⟩ − a).
    ScaledDelta(ScaledArgs),
    /// Finite-n approximants of a scaled delta, with gaps and tail bounds.
    Approximant(ApproximantArgs),
    /// Product of deltas over the directions f_1..f_n.
    Product(ProductArgs),
    /// Σ_n δ(zB(t) − a + n) through the theta function.
    Series(SeriesArgs),
    /// Jacobi ϑ(ρ, τ).
    Theta(ThetaArgs_),
    /// Local time L(t, a).
    Localtime(LocalTimeArgs),
    /// Feynman integrand of a particle on a circle.
    Circle(CircleArgs),
    /// Randomized verification suites.
    Verify(VerifyArgs),
    /// Monte Carlo oracles.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// JSON {"t": real, "a": [re, im]}.
    #[arg(long, conflicts_with_all = ["t", "a"])]
    pub input: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a: Option<Cplx>,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    #[arg(long, value_enum, default_value = "s")]
    pub transform: Transform,
}

#[derive(Debug, Args)]
pub struct DeltaSource {
    /// JSON {"eta": element, "a": [re, im], "z": [re, im], "alpha": real}.
    #[arg(long, conflicts_with_all = ["eta", "t", "a", "z", "alpha"])]
    pub input: Option<String>,
    /// Direction η (defaults to 1_[0,t) with --t, else 1_[0,1)).
    #[arg(long, conflicts_with = "t")]
    pub eta: Option<Xi>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a: Option<Cplx>,
    #[arg(long)]
    pub z: Option<Cplx>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScaledArgs {
    #[command(flatten)]
    pub source: DeltaSource,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    #[arg(long, value_enum, default_value = "s")]
    pub transform: Transform,
    /// Witness s of the growth certificate.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct ApproximantArgs {
    #[command(flatten)]
    pub source: DeltaSource,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    /// Cutoffs n.
    #[arg(long, default_value = "4,8,16,32", value_parser = parse_list)]
    pub n: std::vec::Vec<u32>,
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    /// JSON {"z": [re, im], "alpha": real, "factors": [{"f": element, "a": [re, im]}, ...]}.
    #[arg(long)]
    pub input: String,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    #[arg(long, value_enum, default_value = "s")]
    pub transform: Transform,
    /// Also evaluate the λ-quadrature oracle (at most three factors).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// JSON {"z": [re, im], "t": real, "a": [re, im]}.
    #[arg(long, conflicts_with_all = ["z", "t", "a"])]
    pub input: Option<String>,
    #[arg(long)]
    pub z: Option<Cplx>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a: Option<Cplx>,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    /// Also tabulate partial sums |n| ≤ N for these N.
    #[arg(long, value_parser = parse_list)]
    pub partial: Option<std::vec::Vec<u32>>,
}

#[derive(Debug, Args)]
pub struct ThetaArgs_ {
    #[arg(long, default_value = "0")]
    pub rho: Cplx,
    #[arg(long)]
    pub tau: Cplx,
    #[arg(long, default_value_t = 1e-16)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct LocalTimeArgs {
    /// JSON {"t": real, "a": [re, im]}.
    #[arg(long, conflicts_with_all = ["t", "a"])]
    pub input: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a: Option<Cplx>,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Tabulate s ↦ SL(s, a)(ξ) at this many equally spaced times in (0, t].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircleMode {
    Value,
    Residual,
    Divergence,
}

#[derive(Debug, Args)]
pub struct CircleArgs {
    /// JSON {"phi0": real, "t": real, "packet": {"l": [re, im], ...}, "s": real}.
    #[arg(long, conflicts_with_all = ["phi0", "t", "modes", "s"])]
    pub input: Option<String>,
    #[arg(long)]
    pub phi0: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Packet modes `l:coeff,...`.
    #[arg(long)]
    pub modes: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_enum, default_value = "value")]
    pub mode: CircleMode,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    /// Grid points per axis for the residual table.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// End point φ₁ of the localized propagator.
    #[arg(long, default_value_t = 0.5)]
    pub phi1: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: verify::Suite,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Delta,
    Product,
    Localtime,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    /// Payload of the matching evaluation command.
    #[arg(long)]
    pub input: String,
    #[arg(long, default_value = "zero")]
    pub xi: Xi,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Band half-width of the occupation-time estimate.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 20_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 2_000)]
    pub steps: usize,
}

/// Product payload before validation, so that a singular Gram matrix surfaces as a numerical
/// failure rather than a malformed payload.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductJson {
    z: [f64; 2],
    #[serde(default)]
    alpha: f64,
    factors: Vec<FactorJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorJson {
    f: FunctionElement,
    a: [f64; 2],
}

fn product_from(src: &str) -> Result<DeltaProduct, CliError> {
    let j: ProductJson = read_payload(src)?;
    let factors = j.factors.into_iter().map(|f| (f.f, cx(f.a))).collect();
    Ok(DeltaProduct::new(cx(j.z), factors, Sector::new(j.alpha)?)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BrownianJson {
    t: f64,
    a: [f64; 2],
}

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn brownian_source(input: &Option<String>, t: Option<f64>, a: Option<Cplx>) -> Result<(f64, Complex64), CliError> {
    match input {
        Some(src) => {
            let j: BrownianJson = read_payload(src)?;
            Ok((j.t, cx(j.a)))
        }
        None => {
            let t = t.ok_or_else(|| CliError::Usage("--t or --input is required".into()))?;
            Ok((t, a.map(|c| c.0).unwrap_or_default()))
        }
    }
}

fn delta_from(src: &DeltaSource) -> Result<DonskerDelta, CliError> {
    if let Some(input) = &src.input {
        return read_payload(input);
    }
    let eta = match (&src.eta, src.t) {
        (Some(e), _) => e.0.clone(),
        (None, Some(t)) => FunctionElement::brownian(t)?,
        (None, None) => FunctionElement::brownian(1.0)?,
    };
    let sector = Sector::new(src.alpha.unwrap_or(0.0))?;
    let z = src.z.map(|c| c.0).unwrap_or(Complex64::new(1.0, 0.0));
    Ok(DonskerDelta::new(eta, src.a.map(|c| c.0).unwrap_or_default(), z, sector)?)
}

fn circle_from(args: &CircleArgs) -> Result<CircleState, CliError> {
    if let Some(input) = &args.input {
        return read_payload(input);
    }
    let modes = parse_modes(args.modes.as_deref().unwrap_or("1:1")).map_err(CliError::Usage)?;
    let packet = WavePacket::from_modes(&modes, args.s.unwrap_or(1.0))?;
    let t = args.t.ok_or_else(|| CliError::Usage("--t or --input is required".into()))?;
    Ok(CircleState::new(args.phi0.unwrap_or(0.0), t, packet)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn value_report(command: &str, transform: Transform, xi: &FunctionElement, value: Complex64) -> ValueReport {
    ValueReport {
        command: command.into(),
        transform: match transform {
            Transform::S => "S".into(),
            Transform::T => "T".into(),
        },
        xi: xi.clone(),
        value: pair(value),
        certificate: None,
        truncation: None,
        tail_constant: None,
        bound: None,
        oracle: None,
        oracle_gap: None,
    }
}

fn run_delta(a: &DeltaArgs) -> Result<Output, CliError> {
    let (t, off) = brownian_source(&a.input, a.t, a.a)?;
    let xi = &a.xi.0;
    let v = match a.transform {
        Transform::S => s_delta(t, off, xi)?,
        Transform::T => t_delta(t, off, xi)?,
    };
    Ok(Output::json(to_json(&value_report("delta", a.transform, xi, v))))
}

fn run_scaled(a: &ScaledArgs) -> Result<Output, CliError> {
    let d = delta_from(&a.source)?;
    let xi = &a.xi.0;
    let v = match a.transform {
        Transform::S => s_scaled_delta(&d, xi)?,
        Transform::T => t_scaled_delta(&d, xi)?,
    };
    let cert = d.growth_certificate(a.s)?;
    let mut r = value_report("scaled-delta", a.transform, xi, v);
    r.certificate = Some(CertificateReport {
        s: a.s,
        k1: cert.k1,
        k2: cert.k2,
        singularity_order: singularity_order(cert.k2, 0)?,
    });
    Ok(Output::json(to_json(&r)))
}

fn run_approximant(a: &ApproximantArgs) -> Result<Output, CliError> {
    let d = delta_from(&a.source)?;
    let xi = &a.xi.0;
    if a.n.is_empty() {
        return Err(CliError::Usage("--n needs at least one cutoff".into()));
    }
    let limit = s_scaled_delta(&d, xi)?;
    let mut rows = Vec::new();
    for &n in &a.n {
        let spec = ApproximantSpec::packaged(n, d.sector(), d.eta())?;
        let v = s_approximant(&spec, d.z(), d.a(), xi)?;
        let bound = approximant_tail_bound(&spec, d.z(), d.a(), xi)?;
        rows.push(vec![n as f64, v.re, v.im, (v - limit).norm(), bound]);
    }
    // `contour_tail` bounds only the cut-off part of the ν-integral; for directions outside
    // the Hermite span the gap also carries the projection error of η_n.
    let columns: Vec<String> = ["n", "re", "im", "gap", "contour_tail"].map(String::from).to_vec();
    let mut summary = serde_json::Map::new();
    summary.insert("limit".into(), to_json(&pair(limit)));
    let report = TableReport {
        command: "approximant".into(),
        columns: columns.clone(),
        rows: rows.clone(),
        summary,
    };
    Ok(Output::json(to_json(&report)).with_table(
        Table { columns, rows },
        Some(Axes {
            x: "n",
            y: vec!["gap", "contour_tail"],
            log_y: true,
            title: "approximant gap against cutoff".into(),
        }),
    ))
}

fn run_product(a: &ProductArgs) -> Result<Output, CliError> {
    let p = product_from(&a.input)?;
    let xi = &a.xi.0;
    let v = match a.transform {
        Transform::S => s_product(&p, xi)?,
        Transform::T => t_product(&p, xi)?,
    };
    let mut r = value_report("product", a.transform, xi, v);
    if a.oracle {
        let spec = QuadratureSpec::absolute(1e-11);
        let o = match a.transform {
            Transform::S => s_product_oracle(&p, xi, &spec)?,
            Transform::T => t_product_oracle(&p, xi, &spec)?,
        };
        r.oracle = Some(pair(o));
        r.oracle_gap = Some((o - v).norm());
    }
    Ok(Output::json(to_json(&r)))
}

fn run_series(a: &SeriesArgs) -> Result<Output, CliError> {
    let d: DeltaSeries = match &a.input {
        Some(src) => read_payload(src)?,
        None => DeltaSeries::new(
            a.z.map(|c| c.0).unwrap_or(Complex64::new(1.0, 0.0)),
            a.t.ok_or_else(|| CliError::Usage("--t or --input is required".into()))?,
            a.a.map(|c| c.0).unwrap_or_default(),
        )?,
    };
    let xi = &a.xi.0;
    let (v, truncation) = s_series_detailed(&d, xi)?;
    let mut r = value_report("series", Transform::S, xi, v);
    r.truncation = Some(truncation);
    r.tail_constant = Some(series_tail_constant(&d, xi)?);
    let Some(ns) = &a.partial else {
        return Ok(Output::json(to_json(&r)));
    };
    let mut rows = Vec::new();
    for &n in ns {
        let p = partial_sum(d.z(), d.t(), d.a(), Sector::principal(), n as u64, xi)?;
        rows.push(vec![
            n as f64,
            p.value.re,
            p.value.im,
            (p.value - v).norm(),
            series_tail_bound(&d, xi, n as u64)?,
        ]);
    }
    let columns: Vec<String> = ["n", "re", "im", "gap", "tail_bound"].map(String::from).to_vec();
    let mut summary = serde_json::Map::new();
    summary.insert("value".into(), to_json(&r.value));
    summary.insert("truncation".into(), truncation.into());
    let report = TableReport {
        command: "series".into(),
        columns: columns.clone(),
        rows: rows.clone(),
        summary,
    };
    Ok(Output::json(to_json(&report)).with_table(
        Table { columns, rows },
        Some(Axes {
            x: "n",
            y: vec!["gap", "tail_bound"],
            log_y: true,
            title: "partial sums against the theta form".into(),
        }),
    ))
}

fn run_theta(a: &ThetaArgs_) -> Result<Output, CliError> {
    let args = ThetaArgs::new(a.rho.0, a.tau.0)?;
    let v = theta(args, a.tol)?;
    Ok(Output::json(to_json(&ThetaReport {
        rho: pair(a.rho.0),
        tau: pair(a.tau.0),
        value: pair(v.value),
        truncation: v.truncation,
    })))
}

fn run_localtime(a: &LocalTimeArgs) -> Result<Output, CliError> {
    let (t, off) = brownian_source(&a.input, a.t, a.a)?;
    let q = LocalTimeQuery::new(t, off)?;
    let xi = &a.xi.0;
    let v = s_local_time(&q, xi, a.tol)?;
    let r = value_report("localtime", Transform::S, xi, v);
    let Some(n) = a.grid else {
        return Ok(Output::json(to_json(&r)));
    };
    if n == 0 {
        return Err(CliError::Usage("--grid needs at least one point".into()));
    }
    let mut rows = Vec::with_capacity(n);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = 0.0;
    for k in 1..=n {
        let s = t * k as f64 / n as f64;
        acc += s_local_time_between(off, xi, prev, s, a.tol / n as f64)?;
        rows.push(vec![s, acc.re, acc.im]);
        prev = s;
    }
    let columns: Vec<String> = ["t", "re", "im"].map(String::from).to_vec();
    let mut summary = serde_json::Map::new();
    summary.insert("value".into(), to_json(&r.value));
    let report = TableReport {
        command: "localtime".into(),
        columns: columns.clone(),
        rows: rows.clone(),
        summary,
    };
    Ok(Output::json(to_json(&report)).with_table(
        Table { columns, rows },
        Some(Axes {
            x: "t",
            y: vec!["re", "im"],
            log_y: false,
            title: "S-transform of local time against t".into(),
        }),
    ))
}

fn run_circle(a: &CircleArgs) -> Result<Output, CliError> {
    match a.mode {
        CircleMode::Value => {
            let state = circle_from(a)?;
            let xi = &a.xi.0;
            let mut r = value_report("circle", Transform::T, xi, t_circle(&state, xi));
            r.bound = Some(uniform_bound(&state, xi));
            Ok(Output::json(to_json(&r)))
        }
        CircleMode::Residual => {
            let state = circle_from(a)?;
            let (phi, t) = default_grids(a.grid, state.t());
            let res = schroedinger_residual(state.packet(), &phi, &t, a.h)?;
            let columns: Vec<String> = ["phi0", "t", "psi_re", "psi_im", "residual"].map(String::from).to_vec();
            let rows: Vec<Vec<f64>> = res
                .rows
                .iter()
                .map(|r| vec![r.phi0, r.t, r.psi_re, r.psi_im, r.residual])
                .collect();
            let mut summary = serde_json::Map::new();
            summary.insert("max_residual".into(), res.max_residual.into());
            summary.insert("h".into(), a.h.into());
            let report = TableReport {
                command: "circle".into(),
                columns: columns.clone(),
                rows: rows.clone(),
                summary,
            };
            Ok(Output::json(to_json(&report)).with_table(
                Table { columns, rows },
                Some(Axes {
                    x: "phi0",
                    y: vec!["psi_re", "psi_im", "residual"],
                    log_y: false,
                    title: "propagator and Schroedinger residual".into(),
                }),
            ))
        }
        CircleMode::Divergence => {
            let t = match &a.input {
                Some(_) => circle_from(a)?.t(),
                None => a.t.ok_or_else(|| CliError::Usage("--t or --input is required".into()))?,
            };
            let phi0 = match &a.input {
                Some(_) => circle_from(a)?.phi0(),
                None => a.phi0.unwrap_or(0.0),
            };
            Ok(Output::json(to_json(&localized_divergence_check(t, a.phi1, phi0)?)))
        }
    }
}

fn mollified_kernel(offsets: Vec<f64>) -> Result<impl Fn(&[f64]) -> Complex64 + Sync, CliError> {
    let w = richardson_weights(&DEFAULT_EPSILONS)?;
    Ok(move |x: &[f64]| {
        let v: f64 = x
            .iter()
            .zip(&offsets)
            .map(|(x, a)| extrapolated_mollifier(&DEFAULT_EPSILONS, &w, x - a))
            .product();
        Complex64::new(v, 0.0)
    })
}

fn real_offsets(z: Complex64, a: &[Complex64]) -> Result<Vec<f64>, CliError> {
    if z != Complex64::new(1.0, 0.0) || a.iter().any(|a| a.im != 0.0) {
        return Err(CliError::Core(hida_core::Error::DomainViolation(
            "Monte Carlo oracle needs z = 1 and real offsets".into(),
        )));
    }
    Ok(a.iter().map(|a| a.re).collect())
}

fn run_oracle(a: &OracleArgs) -> Result<Output, CliError> {
    let xi = &a.xi.0;
    let (est, exact, bias): (Estimate, Complex64, Option<f64>) = match a.kind {
        OracleKind::Delta => {
            let d: DonskerDelta = read_payload(&a.input)?;
            let kernel = mollified_kernel(real_offsets(d.z(), &[d.a()])?)?;
            let f = CylinderFunctional { family: vec![d.eta().clone()], eval: &kernel };
            (estimate_transform(TransformKind::S, &f, xi, a.samples, a.seed)?, s_scaled_delta(&d, xi)?, None)
        }
        OracleKind::Product => {
            let p = product_from(&a.input)?;
            let offsets: Vec<Complex64> = p.factors().iter().map(|(_, a)| *a).collect();
            let kernel = mollified_kernel(real_offsets(p.z(), &offsets)?)?;
            let f = CylinderFunctional {
                family: p.factors().iter().map(|(f, _)| f.clone()).collect(),
                eval: &kernel,
            };
            (estimate_transform(TransformKind::S, &f, xi, a.samples, a.seed)?, s_product(&p, xi)?, None)
        }
        OracleKind::Localtime => {
            let j: BrownianJson = read_payload(&a.input)?;
            let q = LocalTimeQuery::new(j.t, cx(j.a))?;
            if *xi != FunctionElement::zero() || q.a().im != 0.0 {
                return Err(CliError::Usage("the occupation-time oracle needs --xi zero and real a".into()));
            }
            let a_re = q.a().re.abs();
            let est = occupation_oracle(q.t(), a_re, a.eps, a.paths, a.steps, a.seed)?;
            let bias = occupation_bias_bound(q.t(), a_re, a.eps, a.steps)?;
            (est, s_local_time(&q, xi, 1e-12)?, Some(bias))
        }
    };
    Ok(Output::json(to_json(&OracleReport {
        kind: format!("{:?}", a.kind).to_lowercase(),
        seed: a.seed,
        re: est.re,
        im: est.im,
        stderr: est.stderr,
        exact: pair(exact),
        z_score: est.z_score(exact),
        bias_bound: bias,
    })))
}

fn dispatch(cli: &Cli) -> Result<(Output, i32), CliError> {
    let out = match &cli.command {
        Command::Delta(a) => run_delta(a)?,
        Command::ScaledDelta(a) => run_scaled(a)?,
        Command::Approximant(a) => run_approximant(a)?,
        Command::Product(a) => run_product(a)?,
        Command::Series(a) => run_series(a)?,
        Command::Theta(a) => run_theta(a)?,
        Command::Localtime(a) => run_localtime(a)?,
        Command::Circle(a) => run_circle(a)?,
        Command::Oracle(a) => run_oracle(a)?,
        Command::Verify(a) => {
            let r = verify::run(a.suite, a.trials, a.seed)?;
            let code = if r.verdict { EXIT_OK } else { EXIT_VERDICT };
            return Ok((Output::json(to_json(&r)), code));
        }
    };
    Ok((out, EXIT_OK))
}

/// Parses `args`, runs the command, writes the result and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => error::EXIT_DOMAIN,
            };
            let _ = e.print();
            return code;
        }
    };
    let work = || -> Result<i32, CliError> {
        let (out, code) = dispatch(&cli)?;
        emit(&out, cli.format, cli.output.as_deref())?;
        Ok(code)
    };
    let result = match cli.workers {
        Some(n) => with_workers(n, work).unwrap_or_else(|e| Err(e.into())),
        None => work(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}
