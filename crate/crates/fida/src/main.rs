//! Command-line driver: degradation, solving, parameter sweeps, PSNR, and
//! spectrum precomputation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use fida::denoise::Denoiser;
use fida::harness::descriptor::{
    parse_basis, parse_denoiser, parse_mode, parse_operator, parse_strategy,
};
use fida::harness::sweep::{run_sweep, ExperimentSpec, MethodSpec, SolveMethod};
use fida::harness::{
    degrade, geometric_grid, load_or_compute_spectrum, make_phantom, CACHE_DIR_ENV,
};
use fida::image::psnr;
use fida::io;
use fida::rng::RngSeed;
use fida::solver::{fida_solve, ida_solve, wvd_estimate, Gamma, Init, SolverConfig};
use fida::{FidaError, Image, Result};

#[derive(Parser)]
#[command(
    name = "fida",
    about = "Restoration toolkit for linear inverse problems y = Ax + noise",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic piecewise-smooth test image.
    Phantom(PhantomArgs),
    /// Apply a forward operator and add Gaussian noise.
    Degrade(DegradeArgs),
    /// Restore a degraded observation with one solver configuration.
    Solve(SolveArgs),
    /// Apply an internal denoiser to a FIDB file (usable as a bridge target).
    Denoise(DenoiseArgs),
    /// Run a multi-image, multi-seed lambda sweep and emit CSV reports.
    Sweep(SweepArgs),
    /// Peak signal-to-noise ratio between two images.
    Psnr(PsnrArgs),
    /// Precompute (and cache) the attenuation spectrum of an operator/basis pair.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long, default_value_t = 256)]
    rows: usize,
    #[arg(long, default_value_t = 256)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; .fidb stores exact doubles, anything else writes PGM.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DegradeArgs {
    /// Clean input image (PGM or FIDB).
    #[arg(short, long)]
    input: PathBuf,
    /// Operator descriptor, e.g. `blur:sigma=2.0,radius=7` or `gain:seed=3`.
    #[arg(long)]
    op: String,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lossless FIDB output.
    #[arg(short, long)]
    output: PathBuf,
    /// Optional clamped 8-bit preview.
    #[arg(long)]
    preview: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Degraded observation (PGM or FIDB).
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    op: String,
    /// ida, fida, or wvd.
    #[arg(long, default_value = "fida")]
    method: String,
    /// Basis descriptor; `auto` picks the diagonalizing basis for the operator.
    #[arg(long, default_value = "auto")]
    basis: String,
    /// Spectrum weighting: pinv, wiener:tau=..., mask.
    #[arg(long, default_value = "pinv")]
    mode: String,
    /// Delta strategy: exact, subband, frequency, auto.
    #[arg(long, default_value = "auto")]
    strategy: String,
    #[arg(long, default_value = "wavelet-soft")]
    denoiser: String,
    /// Denoising strength lambda_gamma (lambda for wvd).
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Step size; defaults to the method's automatic choice.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-5)]
    rel_tol: f64,
    /// zeros, observation, or adjoint (default depends on the operator kind).
    #[arg(long)]
    init: Option<String>,
    /// Ground truth for per-iteration PSNR reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Per-iteration CSV (iteration, residual[, psnr]).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    preview: Option<PathBuf>,
    /// Input shape `RxC` for operators whose input differs from the
    /// observation (explicit matrices); defaults to the observation shape.
    #[arg(long)]
    shape: Option<String>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long, default_value = "wavelet-soft")]
    denoiser: String,
    /// Input FIDB.
    input: PathBuf,
    /// Output FIDB.
    output: PathBuf,
    /// Threshold lambda_gamma.
    lambda: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Clean input images (PGM or FIDB); all must share one shape.
    #[arg(long, required = true, num_args = 1..)]
    images: Vec<PathBuf>,
    #[arg(long)]
    op: String,
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    sigmas: Vec<f64>,
    /// Method descriptors, repeatable. Semicolon-separated so values can be
    /// full descriptors: `ida`, `fida;name=w-fida;basis=wavelet:taps=6`,
    /// `wvd;basis=auto`. Keys: name, basis, mode, strategy, denoiser.
    #[arg(long = "method", required = true)]
    methods: Vec<String>,
    /// Explicit lambda grid (comma separated). Overrides the geometric grid.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.01)]
    lambda_min: f64,
    #[arg(long, default_value_t = 10.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 15)]
    lambda_count: usize,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-5)]
    rel_tol: f64,
    #[arg(short, long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PsnrArgs {
    reference: PathBuf,
    test: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    op: String,
    #[arg(long, default_value = "auto")]
    basis: String,
    #[arg(long, default_value = "auto")]
    strategy: String,
    /// Shape `RxC` of the operator input.
    #[arg(long, default_value = "256x256")]
    shape: String,
    /// Also write the deltas to this FIDB path (besides the cache).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_shape_arg(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| FidaError::arg(format!("shape must look like 256x256, got `{s}`")))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| FidaError::arg(format!("bad shape `{s}`")))
    };
    Ok((parse(r)?, parse(c)?))
}

fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

fn write_outputs(img: &Image, output: &Path, preview: Option<&PathBuf>) -> Result<()> {
    io::write_image(img, output)?;
    if let Some(p) = preview {
        io::write_pgm(img, p)?;
    }
    Ok(())
}

fn cmd_phantom(a: PhantomArgs) -> Result<()> {
    let img = make_phantom(a.rows, a.cols, RngSeed(a.seed))?;
    io::write_image(&img, &a.output)
}

fn cmd_degrade(a: DegradeArgs) -> Result<()> {
    let img = io::read_image(&a.input)?;
    let op = parse_operator(&a.op, img.shape())?;
    let out = degrade(&img, &op, a.sigma, RngSeed(a.seed))?;
    write_outputs(&out, &a.output, a.preview.as_ref())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let y = io::read_image(&a.input)?;
    let in_shape = match &a.shape {
        Some(s) => parse_shape_arg(s)?,
        None => y.shape(),
    };
    let op = parse_operator(&a.op, in_shape)?;
    let truth = a.truth.as_ref().map(|p| io::read_image(p)).transpose()?;
    let gamma = match a.gamma {
        Some(g) => Gamma::Fixed(g),
        None => Gamma::Auto,
    };
    let init = match a.init.as_deref() {
        Some("zeros") => Init::Zeros,
        Some("observation") => Init::Observation,
        Some("adjoint") => Init::AdjointObservation,
        Some(other) => {
            return Err(FidaError::arg(format!(
                "unknown init `{other}` (expected zeros, observation, adjoint)"
            )))
        }
        None if op.is_gain() => Init::Observation,
        None => Init::AdjointObservation,
    };
    let cfg = SolverConfig {
        gamma,
        lambda_gamma: a.lambda,
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        track_best: true,
        init,
    };

    let result = match a.method.as_str() {
        "ida" => {
            let d = parse_denoiser(&a.denoiser, in_shape)?;
            let trace = ida_solve(&y, &op, &d, &cfg, truth.as_ref())?;
            if let Some(path) = &a.trace {
                write_trace_csv(path, &trace.objective_residual, &trace.iterates_psnr)?;
            }
            trace.final_image
        }
        "fida" => {
            let basis = parse_basis(&a.basis, in_shape, Some(&op))?;
            let strategy = parse_strategy(&a.strategy, &op, &basis)?;
            let spectrum =
                load_or_compute_spectrum(&op, &basis, strategy, cache_dir_from_env().as_deref())?
                    .reweight(parse_mode(&a.mode)?)?;
            let d = parse_denoiser(&a.denoiser, in_shape)?;
            let trace = fida_solve(&y, &op, &basis, &spectrum, &d, &cfg, truth.as_ref())?;
            if let Some(path) = &a.trace {
                write_trace_csv(path, &trace.objective_residual, &trace.iterates_psnr)?;
            }
            trace.final_image
        }
        "wvd" => {
            let basis = parse_basis(&a.basis, in_shape, Some(&op))?;
            let strategy = parse_strategy(&a.strategy, &op, &basis)?;
            let spectrum =
                load_or_compute_spectrum(&op, &basis, strategy, cache_dir_from_env().as_deref())?;
            wvd_estimate(&y, &op, &basis, &spectrum, a.lambda)?
        }
        other => {
            return Err(FidaError::arg(format!(
                "unknown method `{other}` (expected ida, fida, wvd)"
            )))
        }
    };
    write_outputs(&result, &a.output, a.preview.as_ref())
}

fn write_trace_csv(path: &PathBuf, residuals: &[f64], psnrs: &[f64]) -> Result<()> {
    let mut csv = String::from(if psnrs.is_empty() {
        "iteration,residual\n"
    } else {
        "iteration,residual,psnr\n"
    });
    for (k, r) in residuals.iter().enumerate() {
        if let Some(p) = psnrs.get(k) {
            csv.push_str(&format!("{},{r:.6},{p:.4}\n", k + 1));
        } else {
            csv.push_str(&format!("{},{r:.6}\n", k + 1));
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn cmd_denoise(a: DenoiseArgs) -> Result<()> {
    let x = io::read_fidb(&a.input)?;
    let d: Denoiser = parse_denoiser(&a.denoiser, x.shape())?;
    let out = d.denoise(&x, a.lambda)?;
    io::write_fidb(&out, &a.output)
}

fn parse_method_arg(s: &str) -> Result<MethodSpec> {
    // Semicolon-separated so the values themselves can be comma-style
    // descriptors: `fida;basis=wavelet:taps=6,levels=4;mode=wiener:tau=1e-3`.
    // The method kind doubles as the default label.
    let mut parts = s.split(';');
    let kind = parts.next().unwrap_or_default().trim();
    let method = match kind {
        "ida" => SolveMethod::Ida,
        "fida" => SolveMethod::Fida,
        "wvd" => SolveMethod::Wvd,
        other => {
            return Err(FidaError::arg(format!(
                "unknown method kind `{other}` (expected ida, fida, wvd)"
            )))
        }
    };
    let mut spec = MethodSpec {
        name: kind.to_string(),
        method,
        basis: "auto".to_string(),
        mode: "pinv".to_string(),
        strategy: "auto".to_string(),
        denoiser: "wavelet-soft".to_string(),
    };
    for pair in parts.filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| FidaError::arg(format!("expected key=value, got `{pair}`")))?;
        let v = v.trim().to_string();
        match k.trim() {
            "name" => spec.name = v,
            "basis" => spec.basis = v,
            "mode" => spec.mode = v,
            "strategy" => spec.strategy = v,
            "denoiser" => spec.denoiser = v,
            other => {
                return Err(FidaError::arg(format!(
                    "unknown method parameter `{other}` (expected name, basis, mode, strategy, denoiser)"
                )))
            }
        }
    }
    Ok(spec)
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let lambda_grid = match a.lambdas {
        Some(grid) => grid,
        None => geometric_grid(a.lambda_min, a.lambda_max, a.lambda_count)?,
    };
    let spec = ExperimentSpec {
        images: a.images,
        operator: a.op,
        noise_sigmas: a.sigmas,
        methods: a
            .methods
            .iter()
            .map(|m| parse_method_arg(m))
            .collect::<Result<_>>()?,
        lambda_grid,
        runs: a.runs,
        base_seed: RngSeed(a.seed),
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        out_dir: a.out_dir.clone(),
        cache_dir: cache_dir_from_env(),
    };
    let table = run_sweep(&spec)?;
    for row in &table.rows {
        println!(
            "{} {} sigma={}: best lambda {} -> {:.4} dB (final {:.4})",
            row.image, row.method, row.sigma, row.best_lambda, row.psnr_mean, row.psnr_final_mean
        );
    }
    println!("wrote {}", a.out_dir.join("table.csv").display());
    Ok(())
}

fn cmd_psnr(a: PsnrArgs) -> Result<()> {
    let reference = io::read_image(&a.reference)?;
    let test = io::read_image(&a.test)?;
    println!("{:.4}", psnr(&reference, &test)?);
    Ok(())
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<()> {
    let shape = parse_shape_arg(&a.shape)?;
    let op = parse_operator(&a.op, shape)?;
    let basis = parse_basis(&a.basis, shape, Some(&op))?;
    let strategy = parse_strategy(&a.strategy, &op, &basis)?;
    let cache = cache_dir_from_env();
    if cache.is_none() && a.output.is_none() {
        return Err(FidaError::arg(format!(
            "nothing to do: set {CACHE_DIR_ENV} or pass --output"
        )));
    }
    let spec = load_or_compute_spectrum(&op, &basis, strategy, cache.as_deref())?;
    if let Some(path) = a.output {
        let vec = Image::new(1, spec.deltas().len(), spec.deltas().to_vec())?;
        io::write_fidb(&vec, &path)?;
    }
    let nonzero = spec.deltas().iter().filter(|&&d| d > 0.0).count();
    println!(
        "spectrum: {} coefficients, {} nonzero, max delta {:.6e}",
        spec.deltas().len(),
        nonzero,
        spec.max_delta()
    );
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Degrade(a) => cmd_degrade(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Denoise(a) => cmd_denoise(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Psnr(a) => cmd_psnr(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
