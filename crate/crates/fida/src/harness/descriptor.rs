//! Textual descriptors for operators, bases, denoisers, spectrum modes, and
//! delta strategies: `kind:key=value,key=value`, as accepted by the CLI.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use crate::denoise::{Denoiser, EXTERNAL_TIMEOUT};
use crate::error::{FidaError, Result};
use crate::io;
use crate::operators::{
    default_stripe_gains, make_convolution, make_explicit, make_gain_field, make_gaussian_blur,
    make_stripe_gain, ForwardOperator, GainAxis,
};
use crate::rng::RngSeed;
use crate::spectrum::{Mode, Strategy};
use crate::transforms::{
    load_basis, make_canonical, make_dft_basis, make_svd_basis, make_wavelet_basis, OrthoBasis,
};

/// A parsed `kind:key=value,...` descriptor. Parameters are consumed with the
/// typed getters; [`Descriptor::finish`] rejects anything left over, so typos
/// surface as errors instead of being silently ignored.
#[derive(Clone, Debug)]
pub struct Descriptor {
    pub kind: String,
    params: BTreeMap<String, String>,
}

impl FromStr for Descriptor {
    type Err = FidaError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, r),
            None => (s, ""),
        };
        if kind.is_empty() {
            return Err(FidaError::arg(format!("empty descriptor kind in `{s}`")));
        }
        let mut params = BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| FidaError::arg(format!("expected key=value, got `{pair}`")))?;
            if params
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(FidaError::arg(format!(
                    "duplicate parameter `{k}` in `{s}`"
                )));
            }
        }
        Ok(Descriptor {
            kind: kind.to_string(),
            params,
        })
    }
}

impl Descriptor {
    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.params.remove(key)
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    pub fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| FidaError::arg(format!("parameter {key}={v} is not a number"))),
        }
    }

    pub fn take_usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| FidaError::arg(format!("parameter {key}={v} is not an integer"))),
        }
    }

    pub fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(FidaError::arg(format!(
                    "parameter {key}={v} is not a boolean"
                ))),
            },
        }
    }

    pub fn finish(self) -> Result<()> {
        if let Some(key) = self.params.keys().next() {
            return Err(FidaError::arg(format!(
                "unknown parameter `{key}` for descriptor kind `{}`",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Build a forward operator from a descriptor such as
/// `blur:sigma=2.0,radius=7`, `gain:seed=7,axis=col`, `gain:file=g.txt`,
/// `matrix:file=a.fidm`, or `identity`.
pub fn parse_operator(desc: &str, shape: (usize, usize)) -> Result<ForwardOperator> {
    let mut d = Descriptor::parse(desc)?;
    let op = match d.kind.as_str() {
        "blur" => {
            let sigma = d.take_f64("sigma", 2.0)?;
            let radius = d.take_usize("radius", 7)?;
            make_gaussian_blur(shape, sigma, radius)?
        }
        "kernel" => {
            let path = d
                .take_str("file")
                .ok_or_else(|| FidaError::arg("kernel operator needs file=<fidb>"))?;
            let k = io::read_fidb(PathBuf::from(path).as_path())?;
            let (kr, kc) = k.shape();
            make_convolution(shape, k.into_data(), kr, kc)?
        }
        "gain" => {
            let axis = match d.take_str("axis").as_deref() {
                None | Some("col") => GainAxis::Column,
                Some("row") => GainAxis::Row,
                Some(other) => {
                    return Err(FidaError::arg(format!(
                        "gain axis must be col or row, got {other}"
                    )))
                }
            };
            let stripes = match d.take_str("file") {
                Some(path) => io::read_gains(PathBuf::from(path).as_path())?,
                None => {
                    let seed = d.take_usize("seed", 0)? as u64;
                    let count = match axis {
                        GainAxis::Column => shape.1,
                        GainAxis::Row => shape.0,
                    };
                    default_stripe_gains(count, RngSeed(seed))
                }
            };
            make_stripe_gain(shape, &stripes, axis)?
        }
        "identity" => make_gain_field(shape, vec![1.0; shape.0 * shape.1])?,
        "matrix" => {
            let path = d
                .take_str("file")
                .ok_or_else(|| FidaError::arg("matrix operator needs file=<fidm>"))?;
            let m = io::read_fidm(PathBuf::from(path).as_path())?;
            let n = shape.0 * shape.1;
            if m.cols != n {
                return Err(FidaError::shape(n, m.cols, "matrix operator width"));
            }
            let out_shape = match d.take_str("out") {
                Some(s) => parse_shape(&s)?,
                None => shape,
            };
            if m.rows != out_shape.0 * out_shape.1 {
                return Err(FidaError::shape(
                    out_shape.0 * out_shape.1,
                    m.rows,
                    "matrix operator height",
                ));
            }
            // FIDM stores column-major; the operator wants row-major.
            let mut row_major = vec![0.0; m.rows * m.cols];
            for j in 0..m.cols {
                for i in 0..m.rows {
                    row_major[i * m.cols + j] = m.data[j * m.rows + i];
                }
            }
            make_explicit(row_major, shape, out_shape)?
        }
        other => {
            return Err(FidaError::arg(format!(
                "unknown operator kind `{other}` (expected blur, kernel, gain, identity, matrix)"
            )))
        }
    };
    d.finish()?;
    Ok(op)
}

fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| FidaError::arg(format!("shape must look like 256x256, got `{s}`")))?;
    Ok((
        r.parse()
            .map_err(|_| FidaError::arg(format!("bad shape `{s}`")))?,
        c.parse()
            .map_err(|_| FidaError::arg(format!("bad shape `{s}`")))?,
    ))
}

/// Deepest dyadic decomposition the shape supports, capped at 4 levels.
pub fn default_wavelet_levels(shape: (usize, usize)) -> usize {
    let depth = |mut n: usize| {
        let mut l = 0;
        while n >= 2 && n.is_multiple_of(2) {
            n /= 2;
            l += 1;
        }
        l
    };
    depth(shape.0).min(depth(shape.1)).min(4)
}

/// Build a basis from `wavelet:taps=6,levels=4`, `dft`, `canonical`, `svd`,
/// `file:path=...`, or `auto`.
///
/// `auto` picks the basis that diagonalizes the operator: DFT for
/// convolutions, canonical for gains, SVD for explicit matrices.
pub fn parse_basis(
    desc: &str,
    shape: (usize, usize),
    op: Option<&ForwardOperator>,
) -> Result<OrthoBasis> {
    let mut d = Descriptor::parse(desc)?;
    let basis = match d.kind.as_str() {
        "canonical" => make_canonical(shape),
        "dft" => make_dft_basis(shape),
        "wavelet" => {
            let taps = d.take_usize("taps", 6)?;
            let levels = d.take_usize("levels", default_wavelet_levels(shape))?;
            make_wavelet_basis(shape, taps, levels)?
        }
        "svd" => {
            let op = op.ok_or_else(|| FidaError::arg("svd basis needs an operator"))?;
            make_svd_basis(op)?
        }
        "file" => {
            let path = d
                .take_str("path")
                .ok_or_else(|| FidaError::arg("file basis needs path=<fidm>"))?;
            load_basis(PathBuf::from(path).as_path(), shape)?
        }
        "auto" => {
            let op = op.ok_or_else(|| FidaError::arg("auto basis needs an operator"))?;
            let basis = if op.is_convolution() {
                make_dft_basis(shape)
            } else if op.is_gain() {
                make_canonical(shape)
            } else {
                make_svd_basis(op)?
            };
            log::info!("basis auto resolved to {}", basis.kind_name());
            basis
        }
        other => {
            return Err(FidaError::arg(format!(
                "unknown basis kind `{other}` (expected canonical, dft, wavelet, svd, file, auto)"
            )))
        }
    };
    d.finish()?;
    Ok(basis)
}

/// Spectrum weighting mode: `pinv`, `wiener:tau=...`, or `mask`.
pub fn parse_mode(desc: &str) -> Result<Mode> {
    let mut d = Descriptor::parse(desc)?;
    let mode = match d.kind.as_str() {
        "pinv" => Mode::PseudoInverse,
        "wiener" => Mode::Wiener {
            tau: d.take_f64("tau", 1e-3)?,
        },
        "mask" => Mode::Mask,
        other => {
            return Err(FidaError::arg(format!(
                "unknown spectrum mode `{other}` (expected pinv, wiener, mask)"
            )))
        }
    };
    d.finish()?;
    Ok(mode)
}

/// Delta computation strategy: `exact`, `exact:force=true`, `subband`,
/// `frequency`, or `auto` (structured strategy when the pairing allows it,
/// exact otherwise).
pub fn parse_strategy(desc: &str, op: &ForwardOperator, basis: &OrthoBasis) -> Result<Strategy> {
    let mut d = Descriptor::parse(desc)?;
    let strategy = match d.kind.as_str() {
        "exact" => Strategy::Exact {
            force: d.take_bool("force", false)?,
        },
        "subband" => Strategy::PerSubband,
        "frequency" => Strategy::Frequency,
        "auto" => {
            if op.is_convolution() && matches!(basis, OrthoBasis::Dft { .. }) {
                Strategy::Frequency
            } else if op.is_convolution() && basis.subbands().is_some() {
                Strategy::PerSubband
            } else {
                Strategy::Exact { force: false }
            }
        }
        other => {
            return Err(FidaError::arg(format!(
                "unknown delta strategy `{other}` (expected exact, subband, frequency, auto)"
            )))
        }
    };
    d.finish()?;
    Ok(strategy)
}

/// Denoiser descriptor: `wavelet-soft:taps=6,levels=4,include_approx=false`,
/// `wavelet-hard:...`, or `external:cmd=/path/to/tool,timeout=120`.
pub fn parse_denoiser(desc: &str, shape: (usize, usize)) -> Result<Denoiser> {
    let mut d = Descriptor::parse(desc)?;
    let denoiser = match d.kind.as_str() {
        "wavelet-soft" | "wavelet-hard" => {
            let taps = d.take_usize("taps", 6)?;
            let levels = d.take_usize("levels", default_wavelet_levels(shape))?;
            let include_approx = d.take_bool("include_approx", false)?;
            let basis = make_wavelet_basis(shape, taps, levels)?;
            if d.kind == "wavelet-soft" {
                Denoiser::TransformSoft {
                    basis,
                    include_approx,
                }
            } else {
                Denoiser::TransformHard {
                    basis,
                    include_approx,
                }
            }
        }
        "external" => {
            let cmd = d
                .take_str("cmd")
                .ok_or_else(|| FidaError::arg("external denoiser needs cmd=<executable>"))?;
            let timeout = d.take_f64("timeout", EXTERNAL_TIMEOUT.as_secs_f64())?;
            if timeout.is_nan() || timeout <= 0.0 {
                return Err(FidaError::arg("external timeout must be positive"));
            }
            Denoiser::External {
                command: cmd,
                timeout: Duration::from_secs_f64(timeout),
            }
        }
        other => {
            return Err(FidaError::arg(format!(
                "unknown denoiser kind `{other}` (expected wavelet-soft, wavelet-hard, external)"
            )))
        }
    };
    d.finish()?;
    Ok(denoiser)
}
