//! Experiment harness: test-image generation, degradation, spectrum caching,
//! and parameter sweeps with CSV reporting.

pub mod descriptor;
pub mod sweep;

use std::path::Path;

use crate::error::{FidaError, Result};
use crate::image::Image;
use crate::io;
use crate::operators::ForwardOperator;
use crate::rng::{add_gaussian_noise, GaussianSource, RngSeed};
use crate::spectrum::{compute_deltas, Mode, Spectrum, Strategy, DEFAULT_ZERO_TOL};
use crate::transforms::OrthoBasis;
use crate::util::Fnv64;

/// Environment variable naming the directory for cached spectra.
pub const CACHE_DIR_ENV: &str = "FIDA_CACHE_DIR";

/// Deterministic piecewise-smooth geometric phantom in [0, 255]: a smooth
/// background with overlapping constant-intensity ellipses and rectangles,
/// so it has both smooth regions and sharp edges.
pub fn make_phantom(rows: usize, cols: usize, seed: RngSeed) -> Result<Image> {
    if rows == 0 || cols == 0 {
        return Err(FidaError::arg("phantom dimensions must be positive"));
    }
    let mut src = GaussianSource::new(seed.derive(0x5048_414e)); // "PHAN"
    let mut uniform = move || src.next_uniform();
    let (rf, cf) = (rows as f64, cols as f64);

    // Smooth background: tilted plane plus a broad sinusoidal swell.
    let (tilt_r, tilt_c) = (20.0 + 20.0 * uniform(), 20.0 + 20.0 * uniform());
    let phase = std::f64::consts::TAU * uniform();
    let mut data = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let (u, v) = (r as f64 / rf, c as f64 / cf);
            data[r * cols + c] = 70.0
                + tilt_r * u
                + tilt_c * v
                + 25.0 * (std::f64::consts::TAU * (u + v) / 2.0 + phase).sin();
        }
    }

    // Constant-offset ellipses (possibly overlapping).
    for _ in 0..5 {
        let (cr, cc) = (rf * (0.15 + 0.7 * uniform()), cf * (0.15 + 0.7 * uniform()));
        let (ar, ac) = (
            rf * (0.06 + 0.14 * uniform()),
            cf * (0.06 + 0.14 * uniform()),
        );
        let offset = (30.0 + 70.0 * uniform()) * if uniform() < 0.5 { -1.0 } else { 1.0 };
        for r in 0..rows {
            for c in 0..cols {
                let du = (r as f64 - cr) / ar;
                let dv = (c as f64 - cc) / ac;
                if du * du + dv * dv <= 1.0 {
                    data[r * cols + c] += offset;
                }
            }
        }
    }

    // Small high-contrast discs: fine-scale detail.
    for _ in 0..6 {
        let (cr, cc) = (rf * (0.1 + 0.8 * uniform()), cf * (0.1 + 0.8 * uniform()));
        let rad = 1.5 + 4.0 * uniform();
        let offset = (60.0 + 60.0 * uniform()) * if uniform() < 0.5 { -1.0 } else { 1.0 };
        for r in 0..rows {
            for c in 0..cols {
                let (du, dv) = (r as f64 - cr, c as f64 - cc);
                if du * du + dv * dv <= rad * rad {
                    data[r * cols + c] += offset;
                }
            }
        }
    }

    // Thin bars (1-3 pixels across), horizontal or vertical.
    for _ in 0..4 {
        let vertical = uniform() < 0.5;
        let thickness = 1 + (3.0 * uniform()) as usize;
        let offset = (50.0 + 60.0 * uniform()) * if uniform() < 0.5 { -1.0 } else { 1.0 };
        let pos = (if vertical { cf } else { rf } * 0.9 * uniform()) as usize;
        let (lo, hi) = {
            let a = uniform();
            let b = uniform();
            let len = if vertical { rf } else { cf };
            let lo = (len * 0.8 * a.min(b)) as usize;
            let hi =
                lo + ((len * 0.2) as usize).max(8) + (len * 0.4 * (a.max(b) - a.min(b))) as usize;
            (lo, hi)
        };
        for t in 0..thickness {
            for s in lo..hi {
                let (r, c) = if vertical { (s, pos + t) } else { (pos + t, s) };
                if r < rows && c < cols {
                    data[r * cols + c] += offset;
                }
            }
        }
    }

    // Axis-aligned rectangles.
    for _ in 0..3 {
        let r0 = (rf * 0.8 * uniform()) as usize;
        let c0 = (cf * 0.8 * uniform()) as usize;
        let h = 1 + (rf * (0.05 + 0.2 * uniform())) as usize;
        let w = 1 + (cf * (0.05 + 0.2 * uniform())) as usize;
        let offset = (25.0 + 55.0 * uniform()) * if uniform() < 0.5 { -1.0 } else { 1.0 };
        for r in r0..(r0 + h).min(rows) {
            for c in c0..(c0 + w).min(cols) {
                data[r * cols + c] += offset;
            }
        }
    }

    for v in data.iter_mut() {
        *v = v.clamp(0.0, 255.0);
    }
    Image::new(rows, cols, data)
}

/// Apply the forward operator and add Gaussian noise: the standard synthetic
/// degradation `y = Ax + eps`.
pub fn degrade(img: &Image, op: &ForwardOperator, sigma: f64, seed: RngSeed) -> Result<Image> {
    let blurred = op.apply(img)?;
    add_gaussian_noise(&blurred, sigma, seed)
}

/// Geometric grid of `count` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !lo.is_finite() || lo <= 0.0 || !hi.is_finite() || hi < lo {
        return Err(FidaError::arg(format!(
            "geometric grid needs 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if count == 0 {
        return Err(FidaError::arg("grid needs at least one point"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|i| lo * ratio.powi(i as i32)).collect())
}

fn strategy_tag(strategy: Strategy) -> u64 {
    match strategy {
        Strategy::Exact { .. } => 1,
        Strategy::PerSubband => 2,
        Strategy::Frequency => 3,
    }
}

/// Cache key binding the operator, basis, and strategy of a stored spectrum.
pub fn spectrum_cache_key(op: &ForwardOperator, basis: &OrthoBasis, strategy: Strategy) -> u64 {
    Fnv64::new()
        .write_str("spectrum-v1")
        .write_u64(op.id())
        .write_u64(basis.id())
        .write_u64(strategy_tag(strategy))
        .finish()
}

/// Compute the spectrum, consulting `cache_dir` (or `$FIDA_CACHE_DIR` via the
/// CLI) for a previously stored copy. Cached files are FIDB vectors of deltas
/// named by [`spectrum_cache_key`], with a small text sidecar for humans.
pub fn load_or_compute_spectrum(
    op: &ForwardOperator,
    basis: &OrthoBasis,
    strategy: Strategy,
    cache_dir: Option<&Path>,
) -> Result<Spectrum> {
    let key = spectrum_cache_key(op, basis, strategy);
    if let Some(dir) = cache_dir {
        let path = dir.join(format!("{key:016x}.fidb"));
        if path.is_file() {
            let stored = io::read_fidb(&path)?;
            if stored.len() == basis.coeff_len() {
                return Spectrum::from_deltas(
                    stored.into_data(),
                    basis.layout(),
                    basis.id(),
                    Mode::PseudoInverse,
                    DEFAULT_ZERO_TOL,
                );
            }
            log::warn!(
                "cached spectrum {} has wrong length; recomputing",
                path.display()
            );
        }
    }
    let spec = compute_deltas(op, basis, strategy)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
        let vec = Image::new(1, spec.deltas().len(), spec.deltas().to_vec())?;
        io::write_fidb(&vec, &dir.join(format!("{key:016x}.fidb")))?;
        std::fs::write(
            dir.join(format!("{key:016x}.txt")),
            format!(
                "operator id: {:016x}\nbasis: {} ({:016x})\nstrategy tag: {}\ncoefficients: {}\n",
                op.id(),
                basis.kind_name(),
                basis.id(),
                strategy_tag(strategy),
                spec.deltas().len(),
            ),
        )?;
    }
    Ok(spec)
}
