//! Pluggable denoisers: transform-domain soft/hard thresholding and a
//! subprocess bridge for external black-box denoisers.

use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::{FidaError, Result};
use crate::image::Image;
use crate::io;
use crate::transforms::{CoefficientVector, OrthoBasis};

/// Default wall-clock budget for one external denoiser invocation.
pub const EXTERNAL_TIMEOUT: Duration = Duration::from_secs(120);

/// `sign(v) * max(0, |v| - lambda)`, the proximal map of `lambda * |.|`.
pub fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

fn hard_threshold(v: f64, lambda: f64) -> f64 {
    if v.abs() > lambda {
        v
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub enum Denoiser {
    /// Soft-threshold the basis coefficients. When the basis has a wavelet
    /// subband structure and `include_approx` is false, the coarsest
    /// approximation band is left untouched (preserves mean brightness).
    TransformSoft {
        basis: OrthoBasis,
        include_approx: bool,
    },
    /// Hard-threshold the basis coefficients (keep-or-kill at the threshold).
    TransformHard {
        basis: OrthoBasis,
        include_approx: bool,
    },
    /// Invoke `command <input.fidb> <output.fidb> <lambda_gamma>`.
    ///
    /// `command` is split on whitespace so interpreter prefixes work
    /// (`python3 denoise.py`). Exit code 0 and a well-formed output file of
    /// matching dimensions are required.
    External { command: String, timeout: Duration },
}

impl Denoiser {
    pub fn soft(basis: OrthoBasis) -> Self {
        Denoiser::TransformSoft {
            basis,
            include_approx: false,
        }
    }

    pub fn soft_all(basis: OrthoBasis) -> Self {
        Denoiser::TransformSoft {
            basis,
            include_approx: true,
        }
    }

    pub fn hard(basis: OrthoBasis) -> Self {
        Denoiser::TransformHard {
            basis,
            include_approx: false,
        }
    }

    pub fn external(command: impl Into<String>) -> Self {
        Denoiser::External {
            command: command.into(),
            timeout: EXTERNAL_TIMEOUT,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Denoiser::TransformSoft { .. } => "transform-soft",
            Denoiser::TransformHard { .. } => "transform-hard",
            Denoiser::External { .. } => "external",
        }
    }

    /// Apply the denoiser at strength `lambda_gamma`.
    pub fn denoise(&self, x: &Image, lambda_gamma: f64) -> Result<Image> {
        if !lambda_gamma.is_finite() || lambda_gamma < 0.0 {
            return Err(FidaError::arg(format!(
                "lambda_gamma must be finite and nonnegative, got {lambda_gamma}"
            )));
        }
        match self {
            Denoiser::TransformSoft {
                basis,
                include_approx,
            } => threshold_in_basis(basis, x, lambda_gamma, *include_approx, soft_threshold),
            Denoiser::TransformHard {
                basis,
                include_approx,
            } => threshold_in_basis(basis, x, lambda_gamma, *include_approx, hard_threshold),
            Denoiser::External { command, timeout } => {
                run_external(command, *timeout, x, lambda_gamma)
            }
        }
    }
}

fn threshold_in_basis(
    basis: &OrthoBasis,
    x: &Image,
    lambda: f64,
    include_approx: bool,
    rule: fn(f64, f64) -> f64,
) -> Result<Image> {
    if x.shape() != basis.shape() {
        return Err(FidaError::shape(
            format!("{:?}", basis.shape()),
            format!("{:?}", x.shape()),
            "denoise",
        ));
    }
    if lambda == 0.0 {
        return Ok(x.clone());
    }
    let mut c: CoefficientVector = basis.analyze(x)?;
    let skip = if include_approx {
        None
    } else {
        // The approximation band only exists for wavelet layouts; every
        // other basis is thresholded in full.
        basis.subbands().map(|bands| bands[0])
    };
    match skip {
        None => {
            for v in c.values.iter_mut() {
                *v = rule(*v, lambda);
            }
        }
        Some(ll) => {
            let (_, cols) = basis.shape();
            for (j, v) in c.values.iter_mut().enumerate() {
                let (r, col) = (j / cols, j % cols);
                if !ll.contains(r, col) {
                    *v = rule(*v, lambda);
                }
            }
        }
    }
    basis.synthesize(&c)
}

fn run_external(command: &str, timeout: Duration, x: &Image, lambda: f64) -> Result<Image> {
    let mut tokens = command.split_whitespace();
    let program = tokens
        .next()
        .ok_or_else(|| FidaError::arg("external denoiser command is empty"))?;
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("input.fidb");
    let output = dir.path().join("output.fidb");
    io::write_fidb(x, &input)?;

    let mut child = Command::new(program)
        .args(tokens)
        .arg(&input)
        .arg(&output)
        .arg(format!("{lambda}"))
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| external_err(format!("failed to launch `{command}`: {e}")))?;

    let start = Instant::now();
    let status = loop {
        match child.try_wait()? {
            Some(status) => break status,
            None if start.elapsed() > timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(external_err(format!(
                    "`{command}` exceeded the {} s timeout",
                    timeout.as_secs()
                )));
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    };
    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut pipe) = child.stderr.take() {
            use std::io::Read;
            let _ = pipe.read_to_string(&mut stderr);
        }
        let tail: String = stderr.lines().rev().take(3).collect::<Vec<_>>().join(" | ");
        return Err(external_err(format!(
            "`{command}` exited with {status}: {tail}"
        )));
    }
    let out = io::read_fidb(&output)
        .map_err(|e| external_err(format!("`{command}` produced no readable output: {e}")))?;
    if out.shape() != x.shape() {
        return Err(external_err(format!(
            "`{command}` changed dimensions from {:?} to {:?}",
            x.shape(),
            out.shape()
        )));
    }
    Ok(out)
}

fn external_err(reason: String) -> FidaError {
    FidaError::External {
        iteration: 0,
        reason,
    }
}

/// Keep-or-kill oracle for the diagonal-operator setting with unit noise
/// variance: pixel i survives when its squared signal exceeds the noise
/// amplification `1/delta_i^2`, i.e. when the per-pixel SNR exceeds 1.
pub fn oracle_denoise(y: &Image, x_true: &Image, deltas: &[f64]) -> Result<Image> {
    if y.shape() != x_true.shape() {
        return Err(FidaError::shape(
            format!("{:?}", y.shape()),
            format!("{:?}", x_true.shape()),
            "oracle_denoise",
        ));
    }
    if deltas.len() != y.data().len() {
        return Err(FidaError::shape(
            y.data().len(),
            deltas.len(),
            "oracle deltas",
        ));
    }
    let (rows, cols) = y.shape();
    let data = y
        .data()
        .iter()
        .zip(x_true.data())
        .zip(deltas)
        .map(|((&yi, &xi), &d)| {
            if d > 0.0 && xi * xi > 1.0 / (d * d) {
                yi
            } else {
                0.0
            }
        })
        .collect();
    Image::new(rows, cols, data)
}
