//! `nnh`: command-line front end for nn-harmonic.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 precision loss,
//! 4 a `verify` check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod args;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nn_harmonic::hc_expansion::{hc_coefficients, phi_global_series};
use nn_harmonic::io::{write_complex_csv, write_outputs, write_table_csv, RunMetadata};
use nn_harmonic::lorentz::{lorentz_pq_norm, lorentz_weak_norm, weak_boundary_scan};
use nn_harmonic::plancherel::{c_inv_minus, c_nn, plancherel_density};
use nn_harmonic::psido::{
    apply_psido, kernel_continuous, kernel_discrete, kernel_global, GlobalKernelOptions, PsidoConfig,
};
use nn_harmonic::spherical::{phi_nn, phi_nn_hypergeometric, phi_nn_integral_rep, phi_nn_ode, psi_discrete, KType};
use nn_harmonic::transforms::{
    abel_transform, forward, inverse_transform, round_trip, uniform_lambda_grid, RadialProfile, SpectralData,
    TransformConfig,
};
use nn_harmonic::{Complex64, Error, Result};
use serde::Serialize;
use serde_json::json;

use args::{Grid, KernelKind, ProfileSource, Route, Suite, SymbolArg};

#[derive(Debug, Parser)]
#[command(
    name = "nnh",
    version,
    about = "Spherical analysis of (n,n)-type functions on SL(2,R)"
)]
struct Cli {
    /// Output directory for CSV and JSON files
    #[arg(long, global = true, env = "NNH_OUT_DIR", default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spherical function phi_lambda(a_t)
    Phi(PhiArgs),
    /// c-function, c(-lambda)^-1 and Plancherel density
    Cfun(CfunArgs),
    /// Harish-Chandra series against the direct evaluation
    Hc(HcArgs),
    /// Spherical transform of a radial profile
    Transform(TransformArgs),
    /// Inversion formula from a transform sidecar
    Invert(InvertArgs),
    /// Forward then inverse transform with the relative L^2 error
    Roundtrip(TransformArgs),
    /// Abel transform of a K-biinvariant profile
    Abel(AbelArgs),
    /// Weak and (p,q) Lorentz quasi-norms of psi or a given profile
    Lorentz(LorentzArgs),
    /// Apply a pseudo-differential operator to a profile
    PsidoApply(PsidoArgs),
    /// Continuous, discrete or global kernel of a symbol
    Kernel(KernelArgs),
    /// Run the invariant suite and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
struct PhiArgs {
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    /// Imaginary part of lambda
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda_im: f64,
    #[arg(long)]
    t: Grid,
    #[arg(long, value_enum, default_value_t = Route::Auto)]
    route: Route,
}

#[derive(Debug, Args, Serialize)]
struct CfunArgs {
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Grid,
    /// Imaginary part added to every lambda; the density column needs 0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    im: f64,
}

#[derive(Debug, Args, Serialize)]
struct HcArgs {
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda_im: f64,
    #[arg(long)]
    t: Grid,
    #[arg(long, default_value_t = 30)]
    order: usize,
}

#[derive(Debug, Args, Serialize)]
struct TransformArgs {
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
    #[command(flatten)]
    source: ProfileSource,
    /// Spectral cut-off
    #[arg(long = "Lambda", default_value_t = 40.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
}

#[derive(Debug, Args, Serialize)]
struct InvertArgs {
    /// JSON sidecar written by `transform`
    #[arg(long)]
    spectral: PathBuf,
    #[arg(long)]
    t: Grid,
}

#[derive(Debug, Args, Serialize)]
struct AbelArgs {
    #[command(flatten)]
    source: ProfileSource,
    #[arg(long, allow_hyphen_values = true)]
    r: Grid,
}

#[derive(Debug, Args, Serialize)]
struct LorentzArgs {
    /// Use psi_{ik} with n = |k| + 1 on [0, t_max]
    #[arg(long, allow_negative_numbers = true, conflicts_with = "input")]
    k: Option<i64>,
    /// Monotone profile CSV instead of psi
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 14.0)]
    t_max: f64,
    #[arg(long, default_value = "0.05:0.05:2")]
    p: Grid,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
}

#[derive(Debug, Args, Serialize)]
struct SymbolArgs {
    /// Builtin name, inline JSON such as {"name":"pole","b":1.25}, or @file.json
    #[arg(long)]
    symbol: SymbolArg,
    #[arg(long, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Debug, Args, Serialize)]
struct PsidoArgs {
    #[command(flatten)]
    symbol: SymbolArgs,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[command(flatten)]
    source: ProfileSource,
    #[arg(long)]
    x: Grid,
    #[arg(long = "Lambda", default_value_t = 40.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
}

#[derive(Debug, Args, Serialize)]
struct KernelArgs {
    #[command(flatten)]
    symbol: SymbolArgs,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = KernelKind::Continuous)]
    kind: KernelKind,
    /// Radii: the A-variable s for continuous/discrete, the Cartan radius for global
    #[arg(long, allow_hyphen_values = true)]
    r: Grid,
    /// Radius of the base point x
    #[arg(long, default_value_t = 0.0)]
    rx: f64,
    #[arg(long = "Lambda")]
    lambda_max: Option<f64>,
    /// Contour height for the global kernel
    #[arg(long)]
    height: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
}

fn config<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn report(paths: &nn_harmonic::io::OutputPaths) {
    out!("wrote {}", paths.csv.display());
    out!("wrote {}", paths.json.display());
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("p must lie in [1, inf), got {p}")))
    }
}

fn run_phi(out: &Path, a: &PhiArgs) -> Result<()> {
    let kt = KType::new(a.n);
    let l = Complex64::new(a.lambda, a.lambda_im);
    let ts = &a.t.values;
    let values: Vec<Complex64> = match a.route {
        Route::Ode => phi_nn_ode(kt, l, ts)?,
        route => ts
            .iter()
            .map(|&t| match route {
                Route::Hypergeometric => phi_nn_hypergeometric(kt, l, t),
                Route::Integral => phi_nn_integral_rep(kt, l, t),
                _ => phi_nn(kt, l, t),
            })
            .collect::<Result<_>>()?,
    };
    let meta = RunMetadata::new("phi", config(a)).results(json!({ "points": ts.len() }));
    report(&write_outputs(out, "phi", &meta, |w| {
        write_complex_csv(w, "t", ts, &values)
    })?);
    Ok(())
}

fn run_cfun(out: &Path, a: &CfunArgs) -> Result<()> {
    let mut header = vec!["lambda", "c_re", "c_im", "cinv_minus_re", "cinv_minus_im"];
    let real_axis = a.im == 0.0;
    if real_axis {
        header.push("density");
    }
    let mut rows = Vec::with_capacity(a.lambda.values.len());
    for &x in &a.lambda.values {
        let l = Complex64::new(x, a.im);
        let cv = c_nn(a.n, l)?;
        let ci = c_inv_minus(a.n, l)?;
        let mut row = vec![x, cv.re, cv.im, ci.re, ci.im];
        if real_axis {
            row.push(plancherel_density(a.n, x)?);
        }
        rows.push(row);
    }
    let meta = RunMetadata::new("cfun", config(a));
    report(&write_outputs(out, "cfun", &meta, |w| {
        write_table_csv(w, &header, &rows)
    })?);
    Ok(())
}

fn run_hc(out: &Path, a: &HcArgs) -> Result<()> {
    let l = Complex64::new(a.lambda, a.lambda_im);
    let exp = hc_coefficients(a.n, l, a.order)?;
    let mut rows = Vec::new();
    for &t in &a.t.values {
        let s = phi_global_series(a.n, l, t, a.order)?;
        let d = phi_nn(KType::new(a.n), l, t)?;
        rows.push(vec![t, s.re, s.im, d.re, d.im, (s - d).norm() / d.norm()]);
    }
    let coeffs: Vec<[f64; 2]> = exp.coeffs.iter().map(|z| [z.re, z.im]).collect();
    let meta = RunMetadata::new("hc", config(a)).results(json!({ "coefficients": coeffs, "growth": exp.growth }));
    let header = ["t", "series_re", "series_im", "direct_re", "direct_im", "rel_err"];
    report(&write_outputs(out, "hc", &meta, |w| {
        write_table_csv(w, &header, &rows)
    })?);
    Ok(())
}

fn spectral_grid(a: &TransformArgs) -> Result<Vec<f64>> {
    if !(a.lambda_max > 0.0) || a.points < 2 {
        return Err(Error::domain("need Lambda > 0 and at least 2 points"));
    }
    Ok(uniform_lambda_grid(a.lambda_max, a.points))
}

fn run_transform(out: &Path, a: &TransformArgs) -> Result<()> {
    let f = a.source.load(a.n)?;
    let s = forward(&f, &spectral_grid(a)?, &TransformConfig::default())?;
    let meta = RunMetadata::new("transform", config(a)).results(json!({ "spectral": s }));
    report(&write_outputs(out, "transform", &meta, |w| {
        write_complex_csv(w, "lambda", &s.lambda_grid, &s.fhat_h)
    })?);
    Ok(())
}

fn run_invert(out: &Path, a: &InvertArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.spectral)?;
    let meta: RunMetadata = serde_json::from_str(&text)?;
    let s: SpectralData = serde_json::from_value(meta.results["spectral"].clone())
        .map_err(|e| Error::domain(format!("{} has no spectral data: {e}", a.spectral.display())))?;
    let inv = inverse_transform(&s, &a.t.values)?;
    let meta = RunMetadata::new("invert", config(a))
        .results(json!({ "truncation_indicator": inv.truncation_indicator }))
        .note(format!("inversion calibration factor {}", inv.calibration));
    report(&write_outputs(out, "invert", &meta, |w| {
        write_complex_csv(w, "t", &inv.profile.t_grid, &inv.profile.values)
    })?);
    Ok(())
}

fn run_roundtrip(out: &Path, a: &TransformArgs) -> Result<()> {
    let f = a.source.load(a.n)?;
    let rt = round_trip(&f, &spectral_grid(a)?, &TransformConfig::default())?;
    out!("relative L2 error: {:.6e}", rt.rel_l2_error);
    out!("without discrete part: {:.6e}", rt.rel_l2_error_without_discrete);
    let meta = RunMetadata::new("roundtrip", config(a))
        .tolerance("rel_l2_error", 1e-3)
        .results(json!({
            "rel_l2_error": rt.rel_l2_error,
            "rel_l2_error_without_discrete": rt.rel_l2_error_without_discrete,
            "discrete": rt.spectral.fhat_b,
        }));
    let s = &rt.spectral;
    report(&write_outputs(out, "roundtrip", &meta, |w| {
        write_complex_csv(w, "lambda", &s.lambda_grid, &s.fhat_h)
    })?);
    Ok(())
}

fn run_abel(out: &Path, a: &AbelArgs) -> Result<()> {
    let f = a.source.load(0)?;
    let vals = abel_transform(&f, &a.r.values)?;
    let rows: Vec<Vec<f64>> = a.r.values.iter().zip(&vals).map(|(r, v)| vec![*r, *v]).collect();
    let meta = RunMetadata::new("abel", config(a));
    report(&write_outputs(out, "abel", &meta, |w| {
        write_table_csv(w, &["r", "value"], &rows)
    })?);
    Ok(())
}

fn lorentz_profile(a: &LorentzArgs) -> Result<RadialProfile> {
    match (a.k, &a.input) {
        (_, Some(path)) => nn_harmonic::io::read_profile(path, 0),
        (Some(k), None) => {
            if k == 0 {
                return Err(Error::domain("k must be nonzero"));
            }
            let kt = KType::new(k.signum() * (k.abs() + 1));
            let m = (a.t_max / 0.01).round() as usize;
            let ts: Vec<f64> = (0..=m).map(|i| i as f64 * 0.01).collect();
            let vals = ts
                .iter()
                .map(|&t| psi_discrete(k, kt, t).map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<_>>()?;
            RadialProfile::new(kt, ts, vals)
        }
        (None, None) => Err(Error::domain("give --k or --input")),
    }
}

fn run_lorentz(out: &Path, a: &LorentzArgs) -> Result<()> {
    let f = lorentz_profile(a)?;
    let mut rows = Vec::new();
    for &p in &a.p.values {
        let weak = lorentz_weak_norm(&f, p)?.value();
        let pq = lorentz_pq_norm(&f, p, a.q)?.value();
        rows.push(vec![p, weak, pq]);
    }
    let p_star = weak_boundary_scan(&f, &a.p.values)?;
    match p_star {
        Some(p) => out!("weak-L^p finite from p = {p:.4}"),
        None => out!("weak-L^p infinite on the whole p grid"),
    }
    let meta = RunMetadata::new("lorentz", config(a))
        .results(json!({ "p_star": p_star }))
        .note("inf marks a detected divergence");
    report(&write_outputs(out, "lorentz", &meta, |w| {
        write_table_csv(w, &["p", "weak", "pq"], &rows)
    })?);
    Ok(())
}

fn run_psido(out: &Path, a: &PsidoArgs) -> Result<()> {
    check_p(a.symbol.p)?;
    let sym = a.symbol.symbol.0.build(a.symbol.n, a.symbol.p, a.epsilon)?;
    let f = a.source.load(a.symbol.n)?;
    let cfg = PsidoConfig {
        lambda_max: a.lambda_max,
        lambda_points: a.points,
        ..PsidoConfig::default()
    };
    let res = apply_psido(&sym, &f, &a.x.values, &cfg)?;
    let meta = RunMetadata::new("psido-apply", config(a));
    report(&write_outputs(out, "psido_apply", &meta, |w| {
        write_complex_csv(w, "x", &a.x.values, &res.values)
    })?);
    Ok(())
}

fn run_kernel(out: &Path, a: &KernelArgs) -> Result<()> {
    check_p(a.symbol.p)?;
    let n = a.symbol.n;
    let sym = a.symbol.symbol.0.build(n, a.symbol.p, a.epsilon)?;
    let rs = &a.r.values;
    let meta = RunMetadata::new("kernel", config(a));
    let paths = match a.kind {
        KernelKind::Continuous | KernelKind::Discrete => {
            let vals = rs
                .iter()
                .map(|&s| match a.kind {
                    KernelKind::Continuous => kernel_continuous(&sym, n, a.rx, s, a.lambda_max),
                    _ => kernel_discrete(&sym, n, s),
                })
                .collect::<Result<Vec<_>>>()?;
            write_outputs(out, "kernel", &meta, |w| write_complex_csv(w, "s", rs, &vals))?
        }
        KernelKind::Global => {
            let opts = GlobalKernelOptions {
                lambda_max: a.lambda_max,
                height: a.height,
            };
            let ks = rs
                .iter()
                .map(|&r| kernel_global(&sym, a.symbol.p, n, a.rx, r, opts))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = ks
                .iter()
                .map(|k| {
                    vec![
                        k.r,
                        k.eta,
                        k.direct.re,
                        k.direct.im,
                        k.contour.re,
                        k.contour.im,
                        k.height,
                        k.bound_ratio,
                    ]
                })
                .collect();
            let mut meta = meta.results(json!({ "bound_exponent": ks.first().map(|k| k.bound_exponent) }));
            for k in &ks {
                if let Some(ind) = k.indentation {
                    meta = meta.note(format!(
                        "r={}: contour lowered from {} to {} below the pole at {}i",
                        k.r, ind.requested_height, ind.used_height, ind.pole_im
                    ));
                }
            }
            let header = [
                "r",
                "eta",
                "direct_re",
                "direct_im",
                "contour_re",
                "contour_im",
                "height",
                "bound_ratio",
            ];
            write_outputs(out, "kernel", &meta, |w| write_table_csv(w, &header, &rows))?
        }
    };
    report(&paths);
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionLoss { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let out = cli.out.as_path();
    let result = match &cli.command {
        Command::Phi(a) => run_phi(out, a),
        Command::Cfun(a) => run_cfun(out, a),
        Command::Hc(a) => run_hc(out, a),
        Command::Transform(a) => run_transform(out, a),
        Command::Invert(a) => run_invert(out, a),
        Command::Roundtrip(a) => run_roundtrip(out, a),
        Command::Abel(a) => run_abel(out, a),
        Command::Lorentz(a) => run_lorentz(out, a),
        Command::PsidoApply(a) => run_psido(out, a),
        Command::Kernel(a) => run_kernel(out, a),
        Command::Verify(a) => {
            return if verify::run(a.suite) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
