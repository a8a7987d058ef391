//! Parameter sweeps: solve every (image, sigma, method, lambda, run) cell,
//! aggregate PSNR statistics, and emit CSV tables and curves.
//!
//! Cells run on a worker pool but are merged in deterministic order, so two
//! executions of the same spec produce byte-identical output files.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::denoise::Denoiser;
use crate::error::{FidaError, Result};
use crate::harness::descriptor::{
    parse_basis, parse_denoiser, parse_mode, parse_operator, parse_strategy,
};
use crate::harness::{degrade, load_or_compute_spectrum};
use crate::image::Image;
use crate::io;
use crate::operators::{operator_norm_sq, ForwardOperator};
use crate::rng::RngSeed;
use crate::solver::{fida_solve, ida_solve, wvd_estimate, Gamma, Init, SolverConfig};
use crate::spectrum::Spectrum;
use crate::transforms::OrthoBasis;
use crate::util::Fnv64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Ida,
    Fida,
    Wvd,
}

/// One solver configuration to benchmark. Descriptor fields use the syntax of
/// [`crate::harness::descriptor`]; `basis` and `strategy` accept `auto`.
#[derive(Clone, Debug)]
pub struct MethodSpec {
    /// Label used in tables and file names; must be unique within a sweep.
    pub name: String,
    pub method: SolveMethod,
    pub basis: String,
    pub mode: String,
    pub strategy: String,
    pub denoiser: String,
}

impl MethodSpec {
    pub fn ida(name: &str, denoiser: &str) -> Self {
        MethodSpec {
            name: name.to_string(),
            method: SolveMethod::Ida,
            basis: "auto".to_string(),
            mode: "pinv".to_string(),
            strategy: "auto".to_string(),
            denoiser: denoiser.to_string(),
        }
    }

    pub fn fida(name: &str, basis: &str, denoiser: &str) -> Self {
        MethodSpec {
            name: name.to_string(),
            method: SolveMethod::Fida,
            basis: basis.to_string(),
            mode: "pinv".to_string(),
            strategy: "auto".to_string(),
            denoiser: denoiser.to_string(),
        }
    }

    pub fn wvd(name: &str, basis: &str) -> Self {
        MethodSpec {
            name: name.to_string(),
            method: SolveMethod::Wvd,
            basis: basis.to_string(),
            mode: "pinv".to_string(),
            strategy: "auto".to_string(),
            denoiser: "wavelet-soft".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub images: Vec<PathBuf>,
    pub operator: String,
    pub noise_sigmas: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub lambda_grid: Vec<f64>,
    pub runs: usize,
    pub base_seed: RngSeed,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(images: Vec<PathBuf>, operator: &str, out_dir: PathBuf) -> Self {
        ExperimentSpec {
            images,
            operator: operator.to_string(),
            noise_sigmas: vec![1.0],
            methods: Vec::new(),
            lambda_grid: Vec::new(),
            runs: 10,
            base_seed: RngSeed(0),
            max_iters: 100,
            rel_tol: 1e-5,
            out_dir,
            cache_dir: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(FidaError::arg("sweep needs at least one image"));
        }
        if self.noise_sigmas.is_empty() || self.lambda_grid.is_empty() || self.methods.is_empty() {
            return Err(FidaError::arg("sweep grids must be non-empty"));
        }
        if self.runs == 0 {
            return Err(FidaError::arg("sweep needs at least one run"));
        }
        for w in self.lambda_grid.iter() {
            if !w.is_finite() || *w < 0.0 {
                return Err(FidaError::arg(
                    "lambda grid entries must be finite and nonnegative",
                ));
            }
        }
        let mut names: Vec<&str> = self.methods.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.methods.len() {
            return Err(FidaError::arg("method names must be unique"));
        }
        Ok(())
    }
}

/// One row of the aggregated table: statistics at the best lambda for an
/// (image, method, sigma) triple. `psnr_mean`/`psnr_std` are over the
/// best-tracked iterate; `psnr_final_mean` is over the last iterate.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub image: String,
    pub method: String,
    pub sigma: f64,
    pub best_lambda: f64,
    pub psnr_mean: f64,
    pub psnr_std: f64,
    pub psnr_final_mean: f64,
    pub iterations_mean: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ResultTable {
    pub rows: Vec<TableRow>,
}

impl ResultTable {
    pub fn row(&self, image: &str, method: &str, sigma: f64) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.image == image && r.method == method && r.sigma == sigma)
    }
}

struct ResolvedMethod {
    name: String,
    method: SolveMethod,
    basis: Option<OrthoBasis>,
    spectrum: Option<Spectrum>,
    denoiser: Option<Denoiser>,
    gamma: Gamma,
}

fn resolve_methods(
    spec: &ExperimentSpec,
    op: &ForwardOperator,
    shape: (usize, usize),
) -> Result<Vec<ResolvedMethod>> {
    // The baseline step size is shared by every IDA cell; compute it once.
    let ida_gamma = {
        let sq = operator_norm_sq(op, 200, spec.base_seed)?;
        if sq > 0.0 {
            Some(Gamma::Fixed(1.0 / sq))
        } else {
            None
        }
    };
    spec.methods
        .iter()
        .map(|m| {
            let resolved = match m.method {
                SolveMethod::Ida => ResolvedMethod {
                    name: m.name.clone(),
                    method: m.method,
                    basis: None,
                    spectrum: None,
                    denoiser: Some(parse_denoiser(&m.denoiser, shape)?),
                    gamma: ida_gamma
                        .ok_or_else(|| FidaError::arg("cannot step against a zero operator"))?,
                },
                SolveMethod::Fida | SolveMethod::Wvd => {
                    let basis = parse_basis(&m.basis, shape, Some(op))?;
                    let strategy = parse_strategy(&m.strategy, op, &basis)?;
                    let spectrum =
                        load_or_compute_spectrum(op, &basis, strategy, spec.cache_dir.as_deref())?
                            .reweight(parse_mode(&m.mode)?)?;
                    let denoiser = if m.method == SolveMethod::Fida {
                        Some(parse_denoiser(&m.denoiser, shape)?)
                    } else {
                        None
                    };
                    ResolvedMethod {
                        name: m.name.clone(),
                        method: m.method,
                        basis: Some(basis),
                        spectrum: Some(spectrum),
                        denoiser,
                        gamma: Gamma::Auto,
                    }
                }
            };
            Ok(resolved)
        })
        .collect()
}

fn default_init(op: &ForwardOperator) -> Init {
    if op.is_gain() {
        Init::Observation
    } else {
        Init::AdjointObservation
    }
}

/// Noise seed for one (image, sigma, run) cell; methods and lambdas share the
/// degraded observation so comparisons see identical data.
pub fn cell_seed(base: RngSeed, image: &str, sigma: f64, run: usize) -> RngSeed {
    let h = Fnv64::new()
        .write_str(image)
        .write_f64(sigma)
        .write_usize(run)
        .finish();
    RngSeed(base.0 ^ h)
}

struct CellOutcome {
    psnr_final: f64,
    psnr_best: f64,
    iterations: usize,
    iterates_psnr: Vec<f64>,
}

fn solve_cell(
    method: &ResolvedMethod,
    y: &Image,
    truth: &Image,
    op: &ForwardOperator,
    lambda: f64,
    cfg_base: &SolverConfig,
) -> Result<CellOutcome> {
    match method.method {
        SolveMethod::Wvd => {
            let out = wvd_estimate(
                y,
                op,
                method.basis.as_ref().unwrap(),
                method.spectrum.as_ref().unwrap(),
                lambda,
            )?;
            let p = crate::image::psnr(truth, &out)?;
            Ok(CellOutcome {
                psnr_final: p,
                psnr_best: p,
                iterations: 1,
                iterates_psnr: vec![p],
            })
        }
        SolveMethod::Ida | SolveMethod::Fida => {
            let cfg = SolverConfig {
                gamma: method.gamma,
                lambda_gamma: lambda,
                ..cfg_base.clone()
            };
            let d = method.denoiser.as_ref().unwrap();
            let trace = if method.method == SolveMethod::Ida {
                ida_solve(y, op, d, &cfg, Some(truth))?
            } else {
                fida_solve(
                    y,
                    op,
                    method.basis.as_ref().unwrap(),
                    method.spectrum.as_ref().unwrap(),
                    d,
                    &cfg,
                    Some(truth),
                )?
            };
            let psnr_final = *trace.iterates_psnr.last().unwrap();
            let best = trace.best.as_ref().unwrap();
            Ok(CellOutcome {
                psnr_final,
                psnr_best: best.psnr,
                iterations: trace.iterations_run,
                iterates_psnr: trace.iterates_psnr,
            })
        }
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Run the full sweep, write `runs.csv`, `table.csv`, `failures.csv`, and the
/// PSNR-vs-lambda / PSNR-vs-iteration curves into the output directory, and
/// return the aggregated table.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let images: Vec<(String, Image)> = spec
        .images
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.to_string_lossy().into_owned());
            Ok((name, io::read_image(p)?))
        })
        .collect::<Result<_>>()?;
    let shape = images[0].1.shape();
    for (name, img) in &images {
        if img.shape() != shape {
            return Err(FidaError::shape(
                format!("{shape:?}"),
                format!("{name}: {:?}", img.shape()),
                "sweep images must share one shape",
            ));
        }
    }
    let op = parse_operator(&spec.operator, shape)?;
    let methods = resolve_methods(spec, &op, shape)?;
    let cfg_base = SolverConfig {
        gamma: Gamma::Auto,
        lambda_gamma: 0.0,
        max_iters: spec.max_iters,
        rel_tol: spec.rel_tol,
        track_best: true,
        init: default_init(&op),
    };

    // Degraded observations, shared across methods and lambdas.
    let degraded: Vec<Vec<Vec<Image>>> = images
        .iter()
        .map(|(name, img)| {
            spec.noise_sigmas
                .iter()
                .map(|&sigma| {
                    (0..spec.runs)
                        .map(|run| {
                            degrade(img, &op, sigma, cell_seed(spec.base_seed, name, sigma, run))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // Flat deterministic cell list; rayon preserves order on collect.
    let mut cells = Vec::new();
    for ii in 0..images.len() {
        for si in 0..spec.noise_sigmas.len() {
            for mi in 0..methods.len() {
                for li in 0..spec.lambda_grid.len() {
                    for run in 0..spec.runs {
                        cells.push((ii, si, mi, li, run));
                    }
                }
            }
        }
    }
    let outcomes: Vec<std::result::Result<CellOutcome, String>> = cells
        .par_iter()
        .map(|&(ii, si, mi, li, run)| {
            solve_cell(
                &methods[mi],
                &degraded[ii][si][run],
                &images[ii].1,
                &op,
                spec.lambda_grid[li],
                &cfg_base,
            )
            .map_err(|e| e.to_string())
        })
        .collect();

    std::fs::create_dir_all(&spec.out_dir)?;
    write_runs_csv(spec, &images, &methods, &cells, &outcomes)?;

    // Aggregate per (image, sigma, method, lambda) over successful runs.
    let table = aggregate(spec, &images, &methods, &cells, &outcomes)?;
    Ok(table)
}

fn write_runs_csv(
    spec: &ExperimentSpec,
    images: &[(String, Image)],
    methods: &[ResolvedMethod],
    cells: &[(usize, usize, usize, usize, usize)],
    outcomes: &[std::result::Result<CellOutcome, String>],
) -> Result<()> {
    let mut runs = String::from("image,method,sigma,lambda,run,psnr_final,psnr_best,iterations\n");
    let mut failures = String::from("image,method,sigma,lambda,run,error\n");
    for (&(ii, si, mi, li, run), outcome) in cells.iter().zip(outcomes) {
        let (name, _) = &images[ii];
        let sigma = spec.noise_sigmas[si];
        let lambda = spec.lambda_grid[li];
        match outcome {
            Ok(c) => {
                let _ = writeln!(
                    runs,
                    "{name},{},{sigma},{lambda},{run},{:.4},{:.4},{}",
                    methods[mi].name, c.psnr_final, c.psnr_best, c.iterations
                );
            }
            Err(e) => {
                let _ = writeln!(
                    failures,
                    "{name},{},{sigma},{lambda},{run},{}",
                    methods[mi].name,
                    e.replace(',', ";").replace('\n', " ")
                );
            }
        }
    }
    std::fs::write(spec.out_dir.join("runs.csv"), runs)?;
    std::fs::write(spec.out_dir.join("failures.csv"), failures)?;
    Ok(())
}

fn aggregate(
    spec: &ExperimentSpec,
    images: &[(String, Image)],
    methods: &[ResolvedMethod],
    cells: &[(usize, usize, usize, usize, usize)],
    outcomes: &[std::result::Result<CellOutcome, String>],
) -> Result<ResultTable> {
    use std::collections::HashMap;
    let mut by_cell: HashMap<(usize, usize, usize, usize), Vec<&CellOutcome>> = HashMap::new();
    for (&(ii, si, mi, li, run), outcome) in cells.iter().zip(outcomes) {
        let _ = run;
        if let Ok(c) = outcome {
            by_cell.entry((ii, si, mi, li)).or_default().push(c);
        }
    }

    let mut table = ResultTable::default();
    let mut table_csv = String::from(
        "image,method,sigma,best_lambda,psnr_mean,psnr_std,psnr_final_mean,iterations\n",
    );
    for (ii, (name, _)) in images.iter().enumerate() {
        for (mi, method) in methods.iter().enumerate() {
            for (si, &sigma) in spec.noise_sigmas.iter().enumerate() {
                // PSNR-vs-lambda curve (mean best-iterate PSNR per lambda).
                let mut curve = String::from("lambda,psnr\n");
                let mut best: Option<(usize, f64)> = None;
                for (li, &lambda) in spec.lambda_grid.iter().enumerate() {
                    let Some(runs) = by_cell.get(&(ii, si, mi, li)) else {
                        continue;
                    };
                    let m = mean(&runs.iter().map(|c| c.psnr_best).collect::<Vec<_>>());
                    let _ = writeln!(curve, "{lambda},{m:.4}");
                    if best.is_none_or(|(_, b)| m > b) {
                        best = Some((li, m));
                    }
                }
                let stem = format!(
                    "{}__{}__sigma{}",
                    sanitize(name),
                    sanitize(&method.name),
                    sanitize(&format!("{sigma}"))
                );
                std::fs::write(
                    spec.out_dir.join(format!("psnr_vs_lambda__{stem}.csv")),
                    curve,
                )?;
                let Some((best_li, _)) = best else {
                    log::warn!(
                        "no successful runs for {name}/{}/sigma {sigma}",
                        method.name
                    );
                    continue;
                };

                let runs = &by_cell[&(ii, si, mi, best_li)];
                let best_vals: Vec<f64> = runs.iter().map(|c| c.psnr_best).collect();
                let final_vals: Vec<f64> = runs.iter().map(|c| c.psnr_final).collect();
                let iter_vals: Vec<f64> = runs.iter().map(|c| c.iterations as f64).collect();
                let row = TableRow {
                    image: name.clone(),
                    method: method.name.clone(),
                    sigma,
                    best_lambda: spec.lambda_grid[best_li],
                    psnr_mean: mean(&best_vals),
                    psnr_std: sample_std(&best_vals),
                    psnr_final_mean: mean(&final_vals),
                    iterations_mean: mean(&iter_vals),
                };
                let _ = writeln!(
                    table_csv,
                    "{},{},{},{},{:.4},{:.4},{:.4},{:.1}",
                    row.image,
                    row.method,
                    row.sigma,
                    row.best_lambda,
                    row.psnr_mean,
                    row.psnr_std,
                    row.psnr_final_mean,
                    row.iterations_mean
                );

                // PSNR-vs-iteration curve at the best lambda, averaged over
                // the runs that reached each iteration.
                let max_len = runs
                    .iter()
                    .map(|c| c.iterates_psnr.len())
                    .max()
                    .unwrap_or(0);
                let mut iter_curve = String::from("iteration,psnr\n");
                for k in 0..max_len {
                    let vals: Vec<f64> = runs
                        .iter()
                        .filter_map(|c| c.iterates_psnr.get(k).copied())
                        .collect();
                    let _ = writeln!(iter_curve, "{},{:.4}", k + 1, mean(&vals));
                }
                std::fs::write(
                    spec.out_dir.join(format!("psnr_vs_iteration__{stem}.csv")),
                    iter_curve,
                )?;
                table.rows.push(row);
            }
        }
    }
    std::fs::write(spec.out_dir.join("table.csv"), table_csv)?;
    Ok(table)
}
