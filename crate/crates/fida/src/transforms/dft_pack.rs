//! Redundancy-free real packing of the unitary 2-D DFT.
//!
//! A real `rows x cols` image has a Hermitian-symmetric spectrum, so only
//! half of it carries information. Frequencies are visited in row-major
//! order; a self-conjugate frequency contributes one real slot, and the
//! lexicographically-first member of each conjugate pair contributes two
//! slots holding sqrt(2) * (re, im). That scaling makes the packed vector an
//! orthonormal real transform of the image: Parseval holds slot-wise, and a
//! symmetric per-frequency weighting is a plain elementwise product.

use rustfft::num_complex::Complex;

use crate::fft;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn conj_index(u: usize, v: usize, rows: usize, cols: usize) -> (usize, usize) {
    ((rows - u) % rows, (cols - v) % cols)
}

/// Visit frequencies in packed order. Calls `f(u, v, self_conjugate)` once
/// per stored frequency.
fn visit(rows: usize, cols: usize, mut f: impl FnMut(usize, usize, bool)) {
    for u in 0..rows {
        for v in 0..cols {
            let (cu, cv) = conj_index(u, v, rows, cols);
            if (cu, cv) == (u, v) {
                f(u, v, true);
            } else if (u, v) < (cu, cv) {
                f(u, v, false);
            }
        }
    }
}

/// Unitary forward DFT, packed into `rows*cols` reals.
pub fn analyze(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let spec = fft::fft2(data, rows, cols);
    let mut out = Vec::with_capacity(rows * cols);
    visit(rows, cols, |u, v, self_conj| {
        let z = spec[u * cols + v] * scale;
        if self_conj {
            out.push(z.re);
        } else {
            out.push(SQRT2 * z.re);
            out.push(SQRT2 * z.im);
        }
    });
    debug_assert_eq!(out.len(), rows * cols);
    out
}

/// Inverse of `analyze`.
pub fn synthesize(packed: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(packed.len(), rows * cols);
    let scale = ((rows * cols) as f64).sqrt();
    let mut spec = vec![Complex::new(0.0, 0.0); rows * cols];
    let mut idx = 0;
    visit(rows, cols, |u, v, self_conj| {
        let z = if self_conj {
            let z = Complex::new(packed[idx], 0.0);
            idx += 1;
            z
        } else {
            let z = Complex::new(packed[idx] / SQRT2, packed[idx + 1] / SQRT2);
            idx += 2;
            z
        };
        spec[u * cols + v] = z;
        let (cu, cv) = conj_index(u, v, rows, cols);
        if (cu, cv) != (u, v) {
            spec[cu * cols + cv] = z.conj();
        }
    });
    // ifft2 normalizes by 1/(rows*cols); multiply by sqrt(rows*cols) overall.
    fft::ifft2_real(&spec, rows, cols)
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

/// Pack a symmetric nonnegative per-frequency magnitude field (full-spectrum,
/// row-major) into the slot layout, duplicating values across the re/im slots
/// of each stored pair.
pub fn pack_magnitudes(mags: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * cols);
    visit(rows, cols, |u, v, self_conj| {
        let m = mags[u * cols + v];
        out.push(m);
        if !self_conj {
            out.push(m);
        }
    });
    out
}
