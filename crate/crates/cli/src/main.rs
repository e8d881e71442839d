//! Single-binary pipeline driver: synthesize or ingest measurement records,
//! interpolate them, estimate density-matrix elements, and run batch studies.
//!
//! Exit codes: 0 success, 2 user/config error, 3 I/O failure, 4 numerical
//! failure (non-finite values).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use padua_tomo::error::TomoError;
use padua_tomo::estimator::estimate_with_errors;
use padua_tomo::experiments::{
    convergence_study, equidistant_comparison_study, noise_study, sample_state, threshold_padua,
    threshold_study, StudyConfig, StudyKind,
};
use padua_tomo::io::{
    self, read_record, read_record_csv, read_state_spec, write_cheb,
    write_grid_csv, write_record, write_record_csv, write_study, RunManifest, StateSpec,
};
use padua_tomo::padua::{
    equidistant_grid, eval_grid, interpolate_padua, interpolate_tensor, padua_points,
    FunctionTag, GridKind, MeasurementRecord, DEFAULT_HALF_WIDTH,
};
use padua_tomo::states::DensityMatrix;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "padua-tomo", version, about = "Phase-space tomography at the Padua points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a state's quasi-probability on a grid into a measurement record
    Sample(SampleArgs),
    /// Interpolate a record into Chebyshev coefficients and a dense surface
    Interpolate(InterpolateArgs),
    /// Estimate density-matrix elements with error bounds from a Q record
    Estimate(EstimateArgs),
    /// Run a batch study (convergence, noise, threshold, equidistant)
    Study(StudyArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// State-spec JSON path, or the literal `test` for the built-in test state
    #[arg(long)]
    state: String,
    /// Padua order n (points = (n+1)(n+2)/2)
    #[arg(long, conflicts_with = "equidistant")]
    padua: Option<usize>,
    /// Equidistant grid as ROWSxCOLS, e.g. 16x16
    #[arg(long)]
    equidistant: Option<String>,
    /// Half-width of the phase-space window
    #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
    l: f64,
    /// Which quasi-probability to sample
    #[arg(long, default_value = "husimi_q", value_parser = parse_function)]
    function: FunctionTag,
    /// Gaussian noise standard deviation added to each sample
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (.json, or .csv for the CSV form with a metadata sidecar)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Measurement-record path (.json or .csv with sidecar)
    #[arg(long)]
    record: PathBuf,
    /// Dense output grid resolution (per axis)
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    /// Zero all samples with |value| below this before interpolating
    #[arg(long)]
    threshold: Option<f64>,
    /// Output basename; writes BASE.coeffs.json and BASE.grid.csv
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    record: PathBuf,
    /// Largest Fock index to estimate (needs 2*d_max <= n)
    #[arg(long, default_value_t = 4)]
    d_max: usize,
    /// Error-propagation constant for the noise bound
    #[arg(long = "K", default_value_t = 1.0)]
    k_factor: f64,
    /// Optional ground-truth state spec for the reconstruction-bias column
    #[arg(long)]
    oracle: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    /// convergence | noise | threshold | equidistant
    #[arg(long, value_parser = parse_kind)]
    kind: StudyKind,
    /// StudyConfig JSON path
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_function(s: &str) -> Result<FunctionTag, String> {
    match s {
        "husimi_q" | "q" => Ok(FunctionTag::HusimiQ),
        "wigner" | "w" => Ok(FunctionTag::Wigner),
        other => Err(format!("unknown function {other:?} (husimi_q or wigner)")),
    }
}

fn parse_kind(s: &str) -> Result<StudyKind, String> {
    match s {
        "convergence" => Ok(StudyKind::Convergence),
        "noise" => Ok(StudyKind::Noise),
        "threshold" => Ok(StudyKind::Threshold),
        "equidistant" => Ok(StudyKind::Equidistant),
        other => Err(format!("unknown study kind {other:?}")),
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        let code = match &e {
            TomoError::Io(_) => 3,
            TomoError::NonFinite(_) => 4,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Interpolate(args) => cmd_interpolate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Study(args) => cmd_study(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_state(spec: &str) -> Result<StateSpec, CliError> {
    if spec == "test" {
        return Ok(StateSpec::Test);
    }
    Ok(read_state_spec(Path::new(spec))?)
}

fn load_record(path: &Path) -> Result<MeasurementRecord, CliError> {
    if path.extension().is_some_and(|e| e == "csv") {
        Ok(read_record_csv(path)?)
    } else {
        Ok(read_record(path)?)
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let spec = load_state(&args.state)?;
    let rho: DensityMatrix = spec.to_density_matrix()?;
    let grid = match (&args.padua, &args.equidistant) {
        (Some(n), None) => padua_points(*n, args.l)?,
        (None, Some(dims)) => {
            let (rows, cols) = dims
                .split_once('x')
                .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                .ok_or_else(|| CliError::user(format!("bad grid spec {dims:?}, want ROWSxCOLS")))?;
            equidistant_grid(rows, cols, args.l)?
        }
        _ => return Err(CliError::user("choose exactly one of --padua N or --equidistant RxC")),
    };
    let record = sample_state(&rho, &grid, args.function, args.eps, args.seed)?;
    if args.output.extension().is_some_and(|e| e == "csv") {
        write_record_csv(&args.output, &record)?;
    } else {
        write_record(&args.output, &record)?;
    }
    let mut manifest = RunManifest::new(
        VERSION,
        "sample",
        serde_json::json!({
            "state": args.state,
            "grid": match grid.kind {
                GridKind::Padua { n } => serde_json::json!({"kind": "padua", "n": n, "L": args.l}),
                GridKind::Equidistant { rows, cols } =>
                    serde_json::json!({"kind": "equidistant", "rows": rows, "cols": cols, "L": args.l}),
                GridKind::Custom => serde_json::json!({"kind": "custom", "L": args.l}),
            },
            "function": match args.function { FunctionTag::HusimiQ => "husimi_q", FunctionTag::Wigner => "wigner" },
            "eps": args.eps,
        }),
    );
    manifest.seed = Some(args.seed);
    manifest.outputs = vec![args.output.display().to_string()];
    manifest.write_sidecar(&args.output)?;
    println!("wrote {} samples to {}", record.values.len(), args.output.display());
    Ok(())
}

fn cmd_interpolate(args: InterpolateArgs) -> Result<(), CliError> {
    if args.resolution < 2 {
        return Err(CliError::user("resolution must be >= 2"));
    }
    let mut record = load_record(&args.record)?;
    let mut surviving = None;
    if let Some(t) = args.threshold {
        let (thinned, count) = threshold_padua(&record, t);
        record = thinned;
        surviving = Some(count);
        println!("{count} nonzero measurements after thresholding at {t}");
    }
    let cheb = match record.grid.kind {
        GridKind::Padua { .. } => interpolate_padua(&record)?,
        GridKind::Equidistant { .. } => interpolate_tensor(&record)?,
        GridKind::Custom => {
            return Err(CliError::user("custom grids have no interpolation routine"))
        }
    };
    let surface = eval_grid(&cheb, args.resolution)?;
    if surface.iter().any(|(_, v)| !v.is_finite()) {
        return Err(CliError { code: 4, message: "non-finite values in interpolated surface".into() });
    }
    let coeffs_path = with_suffix(&args.output, "coeffs.json");
    let grid_path = with_suffix(&args.output, "grid.csv");
    write_cheb(&coeffs_path, &cheb)?;
    write_grid_csv(&grid_path, &surface)?;
    let mut manifest = RunManifest::new(
        VERSION,
        "interpolate",
        serde_json::json!({
            "record": args.record.display().to_string(),
            "resolution": args.resolution,
            "threshold": args.threshold,
            "surviving": surviving,
        }),
    );
    manifest.inputs = vec![args.record.display().to_string()];
    manifest.outputs =
        vec![coeffs_path.display().to_string(), grid_path.display().to_string()];
    manifest.write_sidecar(&coeffs_path)?;
    println!(
        "wrote order-{} coefficients to {} and {}x{} surface to {}",
        cheb.order(),
        coeffs_path.display(),
        args.resolution,
        args.resolution,
        grid_path.display()
    );
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().map(|s| s.to_owned()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    base.with_file_name(name)
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let record = load_record(&args.record)?;
    let n = match record.grid.kind {
        GridKind::Padua { n } => n,
        _ => return Err(CliError::user("estimation needs a Padua record")),
    };
    if 2 * args.d_max > n {
        return Err(CliError::user(format!(
            "d_max = {} needs interpolation order n >= {} (record has n = {n})",
            args.d_max,
            2 * args.d_max
        )));
    }
    let oracle = match &args.oracle {
        Some(s) => Some(load_state(s)?.to_density_matrix()?),
        None => None,
    };
    let set = estimate_with_errors(&record, oracle.as_ref(), args.d_max, args.k_factor)?;
    io::write_estimates(&args.output, &set)?;

    println!("  j  k          re              im        sigma_bound     recon_bound");
    for r in &set.results {
        let recon = r
            .recon_bound
            .map(|b| format!("{b:>14.6e}"))
            .unwrap_or_else(|| format!("{:>14}", "n/a"));
        let flag = if r.noise_dominated() && r.epsilon > 0.0 { "  [noise-dominated]" } else { "" };
        println!(
            "  {}  {}  {:>14.6e}  {:>14.6e}  {:>14.6e}  {recon}{flag}",
            r.j, r.k, r.value.re, r.value.im, r.sigma_bound
        );
    }
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let mut manifest = RunManifest::new(
        VERSION,
        "estimate",
        serde_json::json!({
            "record": args.record.display().to_string(),
            "d_max": args.d_max,
            "K": args.k_factor,
            "oracle": args.oracle,
        }),
    );
    manifest.inputs = vec![args.record.display().to_string()];
    manifest.outputs = vec![args.output.display().to_string()];
    manifest.note = set.note.clone();
    manifest.write_sidecar(&args.output)?;
    Ok(())
}

fn cmd_study(args: StudyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(TomoError::from)?;
    let config: StudyConfig =
        serde_json::from_str(&text).map_err(|e| CliError::user(format!("config: {e}")))?;
    config.validate()?;
    let result = match args.kind {
        StudyKind::Convergence => convergence_study(&config)?,
        StudyKind::Noise => noise_study(&config)?,
        StudyKind::Threshold => threshold_study(&config)?,
        StudyKind::Equidistant => equidistant_comparison_study(&config)?,
    };
    let written = write_study(&args.output, &result)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let mut manifest = RunManifest::new(
        VERSION,
        "study",
        serde_json::json!({
            "kind": args.kind,
            "config": serde_json::from_str::<serde_json::Value>(&text).unwrap_or_default(),
        }),
    );
    manifest.seed = Some(config.seed);
    manifest.inputs = vec![args.config.display().to_string()];
    manifest.outputs = written.iter().map(|p| p.display().to_string()).collect();
    manifest.write_sidecar(&args.output.join("study.json"))?;
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
