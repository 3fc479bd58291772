//! Command-line surface: POVM validation, shadow-norm reports, figure
//! sweeps as CSV and Monte Carlo measurement simulation.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 bad
//! arguments. Sweep grids honor the `SHADOWINV_THREADS` environment variable
//! as a concurrency cap; rows are emitted in grid order regardless of the
//! execution schedule.

mod io;

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use shadow_inversion as si;
use shadow_inversion::{
    CoefficientVector, DualFrame, Operator, OptimizerOptions, Povm, PovmName, SamplingRun,
};

use io::{complex_pair, emit, sig};

#[derive(Debug)]
pub enum CliError {
    Lib(si::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    Args(String),
}

impl From<si::Error> for CliError {
    fn from(e: si::Error) -> Self {
        CliError::Lib(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "invalid JSON: {e}"),
            CliError::Args(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => match e {
                si::Error::SvdFailure(_) | si::Error::SingularSigma { .. } => 2,
                si::Error::InvalidArgument(_) | si::Error::DimTooLarge { .. } => 3,
                _ => 1,
            },
            CliError::Io(_) | CliError::Json(_) | CliError::Args(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "shadowinv",
    about = "Dual-frame shadow estimators for finite POVMs: construction, optimization, simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a POVM and report its frame dimensions.
    Validate(ValidateArgs),
    /// Shadow norm of an observable: standard, canonical and optimized.
    Norm(NormArgs),
    /// CSV sweep of Bloch-sphere projectors (canonical vs optimized norm).
    SweepSphere(SweepSphereArgs),
    /// CSV sweep of equatorial projectors on the planar POVM.
    SweepEquator(SweepEquatorArgs),
    /// CSV table of per-site norms raised to the qubit count.
    Scale(ScaleArgs),
    /// Monte Carlo measurement simulation against the exact enumeration.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Built-in name (pauli6, planar4, triangle3) or JSON file path.
    #[arg(long)]
    povm: String,
}

#[derive(Args)]
struct ObservableArgs {
    /// Built-in observable (bloch, equatorial, planar-pauli, identity,
    /// sigma-x, sigma-y, sigma-z) or JSON file path.
    #[arg(long, default_value = "bloch")]
    observable: String,
    /// Polar angle for Bloch-parameterized observables.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Azimuthal angle for Bloch-parameterized observables.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, default_value = "pauli6")]
    povm: String,
    #[command(flatten)]
    observable: ObservableArgs,
    /// Minimize over the homogeneous parameters.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    optimize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate at a fixed free parameter instead (comma-separated re:im pairs).
    #[arg(long, value_name = "H")]
    h: Option<String>,
}

#[derive(Args)]
struct SweepSphereArgs {
    #[arg(long, default_value = "pauli6")]
    povm: String,
    /// Grid as <n_theta>x<n_phi>; theta spans [0, pi], phi spans [0, 2pi).
    #[arg(long, default_value = "61x61")]
    grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepEquatorArgs {
    #[arg(long, default_value = "planar4")]
    povm: String,
    /// Number of phi samples on [0, pi].
    #[arg(long, default_value = "181")]
    grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleArgs {
    /// Per-site norm of the baseline strategy.
    #[arg(long, default_value_t = 1.5)]
    norm_a: f64,
    /// Per-site norm of the optimized strategy.
    #[arg(long, default_value_t = 1.15)]
    norm_b: f64,
    #[arg(long, default_value_t = 20)]
    n_max: u32,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "pauli6")]
    povm: String,
    #[command(flatten)]
    observable: ObservableArgs,
    /// State as a JSON file; defaults to the maximally mixed state unless
    /// Bloch angles are given.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Polar angle of a pure Bloch state.
    #[arg(long)]
    state_theta: Option<f64>,
    /// Azimuthal angle of a pure Bloch state.
    #[arg(long)]
    state_phi: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use shadow-norm-optimized free parameters.
    #[arg(long, default_value_t = false)]
    optimize: bool,
    /// Fixed free parameter (comma-separated re:im pairs).
    #[arg(long, value_name = "H")]
    h: Option<String>,
    /// Skip sampling and report the exact enumeration only.
    #[arg(long, default_value_t = false)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let (re, im) = part
            .split_once(':')
            .ok_or_else(|| CliError::Args(format!("expected re:im, got `{part}`")))?;
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|_| CliError::Args(format!("bad real part `{re}`")))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|_| CliError::Args(format!("bad imaginary part `{im}`")))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

fn parse_grid_2d(text: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = text
        .split_once('x')
        .ok_or_else(|| CliError::Args(format!("expected <n1>x<n2>, got `{text}`")))?;
    let a = a
        .parse::<usize>()
        .map_err(|_| CliError::Args(format!("bad grid size `{a}`")))?;
    let b = b
        .parse::<usize>()
        .map_err(|_| CliError::Args(format!("bad grid size `{b}`")))?;
    if a < 2 || b < 1 {
        return Err(CliError::Args("grid must be at least 2x1".into()));
    }
    Ok((a, b))
}

fn parse_grid_1d(text: &str) -> Result<usize, CliError> {
    let n = text
        .split_once('x')
        .map(|(a, _)| a)
        .unwrap_or(text)
        .parse::<usize>()
        .map_err(|_| CliError::Args(format!("bad grid size `{text}`")))?;
    if n < 2 {
        return Err(CliError::Args("grid must have at least 2 points".into()));
    }
    Ok(n)
}

/// Resolves a POVM spec to the validated POVM plus its built-in identity
/// when the spec is one of the known names.
fn resolve_povm(spec: &str) -> Result<(Povm, Option<PovmName>), CliError> {
    if let Some(named) = si::by_name(spec) {
        return Ok((named.povm, Some(named.name)));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Args(format!(
            "`{spec}` is neither a built-in POVM name nor an existing file"
        )));
    }
    Ok((io::load_povm(path)?, None))
}

fn resolve_observable(args: &ObservableArgs) -> Result<Operator, CliError> {
    let (id, sx, sy, sz) = si::pauli_ops();
    Ok(match args.observable.as_str() {
        "bloch" => si::bloch_projector(args.theta, args.phi),
        "equatorial" => si::equatorial_projector(args.phi),
        "planar-pauli" => {
            let c = Complex64::new(args.phi.cos(), 0.0);
            let s = Complex64::new(args.phi.sin(), 0.0);
            sx.scale(c).add(&sy.scale(s))
        }
        "identity" => id,
        "sigma-x" => sx,
        "sigma-y" => sy,
        "sigma-z" => sz,
        other => {
            let path = Path::new(other);
            if !path.exists() {
                return Err(CliError::Args(format!(
                    "`{other}` is neither a built-in observable nor an existing file"
                )));
            }
            io::load_observable(path)?
        }
    })
}

fn dual_frame(povm: &Povm) -> Result<(si::FrameDecomposition, DualFrame), CliError> {
    let dec = si::frame_matrix(povm)?;
    let df = si::particular_dual(&dec)?;
    Ok((dec, df))
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let (povm, _) = match resolve_povm(&args.povm) {
        Ok(v) => v,
        Err(CliError::Lib(e)) => {
            // Machine-readable verdict on stdout, then the validation exit.
            println!(
                "{{\"valid\":false,\"reason\":{}}}",
                serde_json::to_string(&e.to_string()).unwrap_or_else(|_| "\"?\"".into())
            );
            return Err(CliError::Lib(e));
        }
        Err(other) => return Err(other),
    };
    let dec = si::frame_matrix(&povm)?;
    println!(
        "d={} n={} D={} free={}",
        povm.dim(),
        povm.len(),
        dec.rank(),
        dec.free_parameters()
    );
    Ok(())
}

fn cmd_norm(args: &NormArgs) -> Result<(), CliError> {
    let (povm, builtin) = resolve_povm(&args.povm)?;
    let observable = resolve_observable(&args.observable)?;
    let (dec, df) = dual_frame(&povm)?;
    println!(
        "povm={} d={} n={} D={} free={}",
        args.povm,
        povm.dim(),
        povm.len(),
        dec.rank(),
        dec.free_parameters()
    );

    let cv = CoefficientVector::new(&observable, &df)?;
    println!("norm_standard={}", sig(si::shadow_norm(&cv, &povm)?));
    if let Some(name) = builtin {
        let canon = si::canonical_estimators(name);
        let canon_cv = CoefficientVector::from_estimators(&observable, &canon);
        println!("norm_canonical={}", sig(si::shadow_norm(&canon_cv, &povm)?));
    }

    if let Some(h_text) = &args.h {
        let h = DVector::from_vec(parse_complex_list(h_text)?);
        let cv = CoefficientVector::with_h(&observable, &df, h)?;
        println!("norm_at_h={}", sig(si::shadow_norm(&cv, &povm)?));
    } else if args.optimize {
        let opts = OptimizerOptions {
            seed: args.seed,
            ..OptimizerOptions::default()
        };
        let result = si::optimize_shadow_norm(&observable, &df, &povm, &opts)?;
        println!("norm_opt={}", sig(result.norm_opt));
        let h_text: Vec<String> = result.h_opt.iter().map(|z| complex_pair(*z)).collect();
        println!("h_opt={}", h_text.join(","));
        println!(
            "evaluations={} converged={} restarts={}",
            result.evaluations, result.converged, result.restarts_used
        );
    }
    Ok(())
}

fn cmd_sweep_sphere(args: &SweepSphereArgs) -> Result<(), CliError> {
    let (povm, builtin) = resolve_povm(&args.povm)?;
    let (n_theta, n_phi) = parse_grid_2d(&args.grid)?;
    let (_, df) = dual_frame(&povm)?;
    let canon = builtin.map(si::canonical_estimators);
    let free = df.free_parameters();
    let opts = OptimizerOptions {
        seed: args.seed,
        ..OptimizerOptions::default()
    };

    let grid: Vec<(f64, f64)> = (0..n_theta)
        .flat_map(|i| {
            let theta = PI * i as f64 / (n_theta - 1) as f64;
            (0..n_phi).map(move |j| (theta, TAU * j as f64 / n_phi as f64))
        })
        .collect();

    let rows = grid
        .par_iter()
        .map(|&(theta, phi)| -> Result<String, CliError> {
            let proj = si::bloch_projector(theta, phi);
            let baseline = match &canon {
                Some(etas) => {
                    let cv = CoefficientVector::from_estimators(&proj, etas);
                    si::shadow_norm(&cv, &povm)?
                }
                None => si::shadow_norm(&CoefficientVector::new(&proj, &df)?, &povm)?,
            };
            let result = si::optimize_shadow_norm(&proj, &df, &povm, &opts)?;
            let mut cols = vec![sig(theta), sig(phi), sig(baseline), sig(result.norm_opt)];
            for z in result.h_opt.iter() {
                cols.push(sig(z.re));
                cols.push(sig(z.im));
            }
            Ok(cols.join(","))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut header: Vec<String> = ["theta", "phi", "norm_canonical", "norm_opt"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for j in 0..free {
        header.push(format!("h{j}_re"));
        header.push(format!("h{j}_im"));
    }
    let mut lines = vec![header.join(",")];
    lines.extend(rows);
    emit(args.out.as_deref(), &lines)
}

fn cmd_sweep_equator(args: &SweepEquatorArgs) -> Result<(), CliError> {
    let (povm, _) = resolve_povm(&args.povm)?;
    let n_phi = parse_grid_1d(&args.grid)?;
    let (_, df) = dual_frame(&povm)?;
    let opts = OptimizerOptions {
        seed: args.seed,
        ..OptimizerOptions::default()
    };

    let angles: Vec<f64> = (0..n_phi)
        .map(|i| PI * i as f64 / (n_phi - 1) as f64)
        .collect();
    let rows = angles
        .par_iter()
        .map(|&phi| -> Result<String, CliError> {
            let proj = si::equatorial_projector(phi);
            let result = si::optimize_shadow_norm(&proj, &df, &povm, &opts)?;
            // Signed-gauge free parameter: the homogeneous coefficient shift
            // on the first outcome.
            let p = if df.free_parameters() > 0 {
                (df.null_basis() * &result.h_opt)[0]
            } else {
                Complex64::ZERO
            };
            Ok([sig(phi), sig(result.norm_opt), sig(p.re), sig(p.im)].join(","))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut lines = vec!["phi,norm_opt,p_r_opt,p_i_opt".to_string()];
    lines.extend(rows);
    emit(args.out.as_deref(), &lines)
}

fn cmd_scale(args: &ScaleArgs) -> Result<(), CliError> {
    let rows = si::scaling_curve(args.norm_a, args.norm_b, args.n_max)?;
    let mut lines = vec!["n,norm_a_pow,norm_b_pow,ratio,samples_a,samples_b".to_string()];
    for row in rows {
        let m_a = si::sample_complexity_bound(row.norm_a_pow, args.epsilon, args.delta)?;
        let m_b = si::sample_complexity_bound(row.norm_b_pow, args.epsilon, args.delta)?;
        lines.push(
            [
                row.n.to_string(),
                sig(row.norm_a_pow),
                sig(row.norm_b_pow),
                sig(row.ratio),
                sig(m_a),
                sig(m_b),
            ]
            .join(","),
        );
    }
    emit(args.out.as_deref(), &lines)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (povm, _) = resolve_povm(&args.povm)?;
    let observable = resolve_observable(&args.observable)?;
    let (_, df) = dual_frame(&povm)?;

    let state = match (&args.state, args.state_theta, args.state_phi) {
        (Some(path), _, _) => io::load_observable(path)?,
        (None, Some(theta), phi) => si::bloch_projector(theta, phi.unwrap_or(0.0)),
        (None, None, Some(phi)) => si::bloch_projector(PI / 2.0, phi),
        (None, None, None) => {
            Operator::identity(povm.dim()).scale(Complex64::new(1.0 / povm.dim() as f64, 0.0))
        }
    };

    let h = if let Some(h_text) = &args.h {
        DVector::from_vec(parse_complex_list(h_text)?)
    } else if args.optimize {
        let opts = OptimizerOptions {
            seed: args.seed,
            ..OptimizerOptions::default()
        };
        si::optimize_shadow_norm(&observable, &df, &povm, &opts)?.h_opt
    } else {
        DVector::zeros(df.free_parameters())
    };

    let cv = CoefficientVector::with_h(&observable, &df, h.clone())?;
    let probs = si::outcome_probabilities(&state, &povm)?;
    let (exact_mean, exact_second) = si::estimate_exact(&probs, &cv)?;
    let norm = si::shadow_norm(&cv, &povm)?;

    // Exact spread of the single-shot estimator and of |a|^2, for the
    // statistical-significance bands.
    let coeffs = cv.total();
    let mut fourth = 0.0;
    for (k, p) in probs.iter().enumerate() {
        fourth += p * coeffs[k].norm_sqr() * coeffs[k].norm_sqr();
    }
    let var_mean = (exact_second - exact_mean.norm_sqr()).max(0.0);
    let var_second = (fourth - exact_second * exact_second).max(0.0);

    let mut lines = vec![
        format!("povm={}", args.povm),
        format!("shots={} seed={}", args.shots, args.seed),
        format!(
            "h={}",
            h.iter()
                .map(|z| complex_pair(*z))
                .collect::<Vec<_>>()
                .join(",")
        ),
        format!("exact_mean={}", complex_pair(exact_mean)),
        format!("exact_second_moment={}", sig(exact_second)),
        format!("shadow_norm={}", sig(norm)),
    ];

    let run = if args.exact {
        None
    } else {
        let etas = si::assemble_estimators(&df, &h)?;
        Some(SamplingRun::execute(
            &state, &povm, &cv, &etas, args.shots, args.seed,
        )?)
    };

    if let Some(run) = &run {
        let sigma_mean = (var_mean / args.shots as f64).sqrt();
        let sigma_second = (var_second / args.shots as f64).sqrt();
        let violation = run.second_moment > norm + 5.0 * sigma_second;
        lines.push(format!(
            "empirical_mean={}",
            complex_pair(run.mean_estimate)
        ));
        lines.push(format!(
            "empirical_second_moment={}",
            sig(run.second_moment)
        ));
        lines.push(format!("mean_sigma={}", sig(sigma_mean)));
        lines.push(format!("second_moment_sigma={}", sig(sigma_second)));
        lines.push(format!("violation={violation}"));
    }

    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        let (header, row) = match &run {
            None => (
                "shots,seed,exact_mean_re,exact_mean_im,exact_second_moment,shadow_norm"
                    .to_string(),
                format!(
                    "{},{},{},{},{},{}",
                    args.shots,
                    args.seed,
                    sig(exact_mean.re),
                    sig(exact_mean.im),
                    sig(exact_second),
                    sig(norm)
                ),
            ),
            Some(run) => (
                "shots,seed,exact_mean_re,exact_mean_im,exact_second_moment,shadow_norm,empirical_mean_re,empirical_mean_im,empirical_second_moment".to_string(),
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    args.shots,
                    args.seed,
                    sig(exact_mean.re),
                    sig(exact_mean.im),
                    sig(exact_second),
                    sig(norm),
                    sig(run.mean_estimate.re),
                    sig(run.mean_estimate.im),
                    sig(run.second_moment)
                ),
            ),
        };
        emit(Some(path), &[header, row])?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Norm(args) => cmd_norm(args),
        Command::SweepSphere(args) => cmd_sweep_sphere(args),
        Command::SweepEquator(args) => cmd_sweep_equator(args),
        Command::Scale(args) => cmd_scale(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SHADOWINV_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
