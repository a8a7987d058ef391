//! Sparsifying bases: periodized orthogonal wavelets, the unitary DFT in a
//! redundancy-free real packing, the canonical basis, exact SVD factors of
//! explicit operators, and bases loaded from FIDM files.

pub mod dft_pack;
pub mod jacobi;
pub mod wavelet;

use std::path::Path;

use crate::error::{FidaError, Result};
use crate::image::Image;
use crate::io;
use crate::operators::ForwardOperator;
use crate::util::Fnv64;

pub use wavelet::{Orientation, Subband};

/// Largest flattened dimension accepted by [`make_svd_basis`].
pub const SVD_DIMENSION_CAP: usize = 4096;

/// How the entries of a [`CoefficientVector`] are arranged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffLayout {
    /// One real per pixel/atom, order defined by the basis.
    Flat { len: usize },
    /// In-place 2-D wavelet subband arrangement.
    Wavelet {
        rows: usize,
        cols: usize,
        levels: usize,
    },
    /// Packed half-spectrum of the real 2-D DFT (see [`dft_pack`]).
    HalfSpectrum { rows: usize, cols: usize },
}

impl CoeffLayout {
    pub fn len(&self) -> usize {
        match self {
            CoeffLayout::Flat { len } => *len,
            CoeffLayout::Wavelet { rows, cols, .. } => rows * cols,
            CoeffLayout::HalfSpectrum { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Transform coefficients `psi^T x` together with their layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub layout: CoeffLayout,
}

impl CoefficientVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Exact SVD factors `A = phi * diag(sv) * psi^T` of an explicit operator.
#[derive(Clone, Debug)]
pub struct SvdBasis {
    in_rows: usize,
    in_cols: usize,
    out_rows: usize,
    out_cols: usize,
    /// Row-major `m x m` orthogonal left factor.
    phi: Vec<f64>,
    /// Row-major `n x n` orthogonal right factor; columns are the atoms.
    psi: Vec<f64>,
    /// Singular values padded with zeros to length `n`, descending.
    sv: Vec<f64>,
}

impl SvdBasis {
    pub fn singular_values(&self) -> &[f64] {
        &self.sv
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.out_rows, self.out_cols)
    }

    /// `phi^T y`, length `m`.
    pub fn phi_transpose_apply(&self, y: &Image) -> Result<Vec<f64>> {
        if y.shape() != (self.out_rows, self.out_cols) {
            return Err(FidaError::shape(
                format!("{:?}", (self.out_rows, self.out_cols)),
                format!("{:?}", y.shape()),
                "phi^T apply",
            ));
        }
        let m = y.len();
        let mut out = vec![0.0; m];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..m).map(|i| self.phi[i * m + j] * y.data()[i]).sum();
        }
        Ok(out)
    }

    /// `phi z`, shaped as the operator output.
    pub fn phi_apply(&self, z: &[f64]) -> Result<Image> {
        let m = self.out_rows * self.out_cols;
        if z.len() != m {
            return Err(FidaError::shape(m, z.len(), "phi apply"));
        }
        let mut out = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..m).map(|j| self.phi[i * m + j] * z[j]).sum();
        }
        Image::new(self.out_rows, self.out_cols, out)
    }
}

#[derive(Clone, Debug)]
pub enum OrthoBasis {
    Canonical {
        rows: usize,
        cols: usize,
    },
    Wavelet {
        rows: usize,
        cols: usize,
        taps: usize,
        levels: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Dft {
        rows: usize,
        cols: usize,
    },
    Svd(SvdBasis),
    /// Dense basis loaded from a FIDM file; columns are the atoms.
    File {
        rows: usize,
        cols: usize,
        /// Column-major `n x n`.
        matrix: Vec<f64>,
        source_id: u64,
    },
}

impl OrthoBasis {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            OrthoBasis::Canonical { rows, cols }
            | OrthoBasis::Wavelet { rows, cols, .. }
            | OrthoBasis::Dft { rows, cols }
            | OrthoBasis::File { rows, cols, .. } => (*rows, *cols),
            OrthoBasis::Svd(b) => (b.in_rows, b.in_cols),
        }
    }

    pub fn coeff_len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OrthoBasis::Canonical { .. } => "canonical",
            OrthoBasis::Wavelet { .. } => "wavelet",
            OrthoBasis::Dft { .. } => "dft",
            OrthoBasis::Svd(_) => "svd",
            OrthoBasis::File { .. } => "file",
        }
    }

    pub fn layout(&self) -> CoeffLayout {
        let (rows, cols) = self.shape();
        match self {
            OrthoBasis::Wavelet { levels, .. } => CoeffLayout::Wavelet {
                rows,
                cols,
                levels: *levels,
            },
            OrthoBasis::Dft { .. } => CoeffLayout::HalfSpectrum { rows, cols },
            _ => CoeffLayout::Flat { len: rows * cols },
        }
    }

    /// Subband blocks for the wavelet kind.
    pub fn subbands(&self) -> Option<Vec<Subband>> {
        match self {
            OrthoBasis::Wavelet {
                rows, cols, levels, ..
            } => Some(wavelet::subbands(*rows, *cols, *levels)),
            _ => None,
        }
    }

    pub fn as_svd(&self) -> Option<&SvdBasis> {
        match self {
            OrthoBasis::Svd(b) => Some(b),
            _ => None,
        }
    }

    /// Stable content hash, used to tie spectra to the basis they were
    /// computed against.
    pub fn id(&self) -> u64 {
        let (rows, cols) = self.shape();
        let h = Fnv64::new().write_usize(rows).write_usize(cols);
        match self {
            OrthoBasis::Canonical { .. } => h.write_str("canonical"),
            OrthoBasis::Wavelet { taps, levels, .. } => h
                .write_str("wavelet")
                .write_usize(*taps)
                .write_usize(*levels),
            OrthoBasis::Dft { .. } => h.write_str("dft"),
            OrthoBasis::Svd(b) => h
                .write_str("svd")
                .write_f64s(&b.sv)
                .write_f64s(&b.psi[..b.psi.len().min(64)]),
            OrthoBasis::File { source_id, .. } => h.write_str("file").write_u64(*source_id),
        }
        .finish()
    }

    fn check_shape(&self, x: &Image, context: &'static str) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(FidaError::shape(
                format!("{:?}", self.shape()),
                format!("{:?}", x.shape()),
                context,
            ));
        }
        Ok(())
    }

    /// Forward transform `psi^T x`.
    pub fn analyze(&self, x: &Image) -> Result<CoefficientVector> {
        self.check_shape(x, "analyze")?;
        let values = match self {
            OrthoBasis::Canonical { .. } => x.data().to_vec(),
            OrthoBasis::Wavelet {
                rows,
                cols,
                levels,
                lo,
                hi,
                ..
            } => {
                let mut data = x.data().to_vec();
                wavelet::forward_2d(&mut data, *rows, *cols, *levels, lo, hi);
                data
            }
            OrthoBasis::Dft { rows, cols } => dft_pack::analyze(x.data(), *rows, *cols),
            OrthoBasis::Svd(b) => {
                let n = b.in_rows * b.in_cols;
                let mut out = vec![0.0; n];
                for (j, o) in out.iter_mut().enumerate() {
                    *o = (0..n).map(|i| b.psi[i * n + j] * x.data()[i]).sum();
                }
                out
            }
            OrthoBasis::File { matrix, .. } => {
                let n = x.len();
                let mut out = vec![0.0; n];
                for (j, o) in out.iter_mut().enumerate() {
                    let col = &matrix[j * n..(j + 1) * n];
                    *o = col.iter().zip(x.data()).map(|(a, b)| a * b).sum();
                }
                out
            }
        };
        Ok(CoefficientVector {
            values,
            layout: self.layout(),
        })
    }

    /// Inverse transform `psi c`.
    pub fn synthesize(&self, c: &CoefficientVector) -> Result<Image> {
        if c.layout != self.layout() {
            return Err(FidaError::shape(
                format!("{:?}", self.layout()),
                format!("{:?}", c.layout),
                "synthesize layout",
            ));
        }
        self.synthesize_values(&c.values)
    }

    pub fn synthesize_values(&self, values: &[f64]) -> Result<Image> {
        let (rows, cols) = self.shape();
        if values.len() != rows * cols {
            return Err(FidaError::shape(
                rows * cols,
                values.len(),
                "synthesize length",
            ));
        }
        match self {
            OrthoBasis::Canonical { .. } => Image::new(rows, cols, values.to_vec()),
            OrthoBasis::Wavelet { levels, lo, hi, .. } => {
                let mut data = values.to_vec();
                wavelet::inverse_2d(&mut data, rows, cols, *levels, lo, hi);
                Image::new(rows, cols, data)
            }
            OrthoBasis::Dft { .. } => {
                Image::new(rows, cols, dft_pack::synthesize(values, rows, cols))
            }
            OrthoBasis::Svd(b) => {
                let n = rows * cols;
                let mut out = vec![0.0; n];
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..n).map(|j| b.psi[i * n + j] * values[j]).sum();
                }
                Image::new(rows, cols, out)
            }
            OrthoBasis::File { matrix, .. } => {
                let n = rows * cols;
                let mut out = vec![0.0; n];
                for (j, &cj) in values.iter().enumerate() {
                    if cj == 0.0 {
                        continue;
                    }
                    let col = &matrix[j * n..(j + 1) * n];
                    for (o, a) in out.iter_mut().zip(col) {
                        *o += a * cj;
                    }
                }
                Image::new(rows, cols, out)
            }
        }
    }
}

pub fn make_canonical(shape: (usize, usize)) -> OrthoBasis {
    OrthoBasis::Canonical {
        rows: shape.0,
        cols: shape.1,
    }
}

pub fn make_dft_basis(shape: (usize, usize)) -> OrthoBasis {
    OrthoBasis::Dft {
        rows: shape.0,
        cols: shape.1,
    }
}

/// Periodized orthonormal wavelet basis. `taps` selects the family
/// (2 = Haar, 4/6/8/12 = Daubechies); the shape must be divisible by
/// `2^levels` in both directions.
pub fn make_wavelet_basis(shape: (usize, usize), taps: usize, levels: usize) -> Result<OrthoBasis> {
    let (rows, cols) = shape;
    if levels == 0 {
        return Err(FidaError::arg("levels must be >= 1"));
    }
    let stride = 1usize << levels;
    if rows % stride != 0 || cols % stride != 0 {
        return Err(FidaError::arg(format!(
            "shape {rows}x{cols} not divisible by 2^{levels}"
        )));
    }
    if (rows >> levels) == 0 || (cols >> levels) == 0 {
        return Err(FidaError::arg("too many levels for this shape"));
    }
    let lo = wavelet::lowpass_taps(taps)?.to_vec();
    let hi = wavelet::highpass_from_lowpass(&lo);
    Ok(OrthoBasis::Wavelet {
        rows,
        cols,
        taps,
        levels,
        lo,
        hi,
    })
}

/// Exact SVD basis of an explicit operator, via one-sided Jacobi.
pub fn make_svd_basis(op: &ForwardOperator) -> Result<OrthoBasis> {
    let matrix = op
        .matrix()
        .ok_or_else(|| FidaError::arg("svd basis requires an explicit-matrix operator"))?;
    let (in_rows, in_cols) = op.input_shape();
    let (out_rows, out_cols) = op.output_shape();
    let n = in_rows * in_cols;
    let m = out_rows * out_cols;
    if n.max(m) > SVD_DIMENSION_CAP {
        return Err(FidaError::arg(format!(
            "svd basis dimension {} exceeds cap {SVD_DIMENSION_CAP}",
            n.max(m)
        )));
    }
    let f = jacobi::svd(matrix, m, n)?;
    let mut sv = f.s;
    sv.resize(n, 0.0);
    Ok(OrthoBasis::Svd(SvdBasis {
        in_rows,
        in_cols,
        out_rows,
        out_cols,
        phi: f.u,
        psi: f.v,
        sv,
    }))
}

/// Load a dense basis from a FIDM matrix file. The matrix must be square;
/// columns that are not unit-norm (within 1e-6) are normalized with a
/// warning.
pub fn load_basis(path: &Path, shape: (usize, usize)) -> Result<OrthoBasis> {
    let m = io::read_fidm(path)?;
    if m.rows != m.cols {
        return Err(FidaError::arg(format!(
            "basis matrix must be square, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = shape.0 * shape.1;
    if m.rows != n {
        return Err(FidaError::shape(n, m.rows, "basis matrix size"));
    }
    let mut matrix = m.data;
    for j in 0..n {
        let col = &mut matrix[j * n..(j + 1) * n];
        let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(FidaError::arg(format!("basis column {j} is zero")));
        }
        if (norm - 1.0).abs() > 1e-6 {
            log::warn!(
                "basis column {j} has norm {norm:.6}; normalizing (file {})",
                path.display()
            );
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
    }
    let source_id = Fnv64::new().write_f64s(&matrix).finish();
    Ok(OrthoBasis::File {
        rows: shape.0,
        cols: shape.1,
        matrix,
        source_id,
    })
}
