//! Periodized orthogonal 2-D wavelet filter bank.
//!
//! Separable Mallat decomposition: each level transforms the rows then the
//! columns of the current approximation block, leaving the standard in-place
//! subband arrangement (LL top-left, details around it). Periodization keeps
//! the transform exactly orthogonal on dyadic-divisible shapes.

use crate::error::{FidaError, Result};

/// Haar lowpass taps, normalized so the filter sums to sqrt(2).
const HAAR: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

// Published Daubechies lowpass coefficients (orthonormal scaling filters).
const DB4: [f64; 4] = [
    0.482_962_913_144_534_16,
    0.836_516_303_737_807_9,
    0.224_143_868_042_013_4,
    -0.129_409_522_551_260_37,
];

const DB6: [f64; 6] = [
    0.332_670_552_950_082_63,
    0.806_891_509_311_092_5,
    0.459_877_502_118_491_54,
    -0.135_011_020_010_254_58,
    -0.085_441_273_882_026_66,
    0.035_226_291_885_709_53,
];

const DB8: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_7,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_09,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

const DB12: [f64; 12] = [
    0.111_540_743_350_109_47,
    0.494_623_890_398_453_06,
    0.751_133_908_021_095_4,
    0.315_250_351_709_197_63,
    -0.226_264_693_965_439_83,
    -0.129_766_867_567_261_94,
    0.097_501_605_587_323_04,
    0.027_522_865_530_305_727,
    -0.031_582_039_317_486_03,
    0.000_553_842_201_161_496_1,
    0.004_777_257_510_945_511,
    -0.001_077_301_085_308_479_6,
];

/// Lowpass taps for a supported family, by tap count.
pub fn lowpass_taps(taps: usize) -> Result<&'static [f64]> {
    match taps {
        2 => Ok(&HAAR),
        4 => Ok(&DB4),
        6 => Ok(&DB6),
        8 => Ok(&DB8),
        12 => Ok(&DB12),
        other => Err(FidaError::arg(format!(
            "unsupported wavelet tap count {other} (supported: 2, 4, 6, 8, 12)"
        ))),
    }
}

/// Quadrature mirror highpass from the lowpass: g[k] = (-1)^k h[N-1-k].
pub fn highpass_from_lowpass(lo: &[f64]) -> Vec<f64> {
    let n = lo.len();
    (0..n)
        .map(|k| {
            if k % 2 == 0 {
                lo[n - 1 - k]
            } else {
                -lo[n - 1 - k]
            }
        })
        .collect()
}

/// One periodized analysis step on a signal of even length `n`:
/// first half of `out` gets approximation, second half detail.
fn analyze_1d(x: &[f64], lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let n = x.len();
    let half = n / 2;
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (k, (&h, &g)) in lo.iter().zip(hi).enumerate() {
            let v = x[(2 * i + k) % n];
            a += h * v;
            d += g * v;
        }
        out[i] = a;
        out[half + i] = d;
    }
}

/// Inverse of `analyze_1d`.
fn synthesize_1d(c: &[f64], lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let n = c.len();
    let half = n / 2;
    out.fill(0.0);
    for i in 0..half {
        let a = c[i];
        let d = c[half + i];
        for (k, (&h, &g)) in lo.iter().zip(hi).enumerate() {
            out[(2 * i + k) % n] += h * a + g * d;
        }
    }
}

fn transform_block(
    data: &mut [f64],
    stride: usize,
    rows: usize,
    cols: usize,
    lo: &[f64],
    hi: &[f64],
    inverse: bool,
) {
    let mut buf = vec![0.0; rows.max(cols)];
    let mut line = vec![0.0; rows.max(cols)];
    if !inverse {
        for r in 0..rows {
            line[..cols].copy_from_slice(&data[r * stride..r * stride + cols]);
            analyze_1d(&line[..cols], lo, hi, &mut buf[..cols]);
            data[r * stride..r * stride + cols].copy_from_slice(&buf[..cols]);
        }
        for c in 0..cols {
            for r in 0..rows {
                line[r] = data[r * stride + c];
            }
            analyze_1d(&line[..rows], lo, hi, &mut buf[..rows]);
            for r in 0..rows {
                data[r * stride + c] = buf[r];
            }
        }
    } else {
        for c in 0..cols {
            for r in 0..rows {
                line[r] = data[r * stride + c];
            }
            synthesize_1d(&line[..rows], lo, hi, &mut buf[..rows]);
            for r in 0..rows {
                data[r * stride + c] = buf[r];
            }
        }
        for r in 0..rows {
            line[..cols].copy_from_slice(&data[r * stride..r * stride + cols]);
            synthesize_1d(&line[..cols], lo, hi, &mut buf[..cols]);
            data[r * stride..r * stride + cols].copy_from_slice(&buf[..cols]);
        }
    }
}

/// Full forward transform, in place over a row-major `rows x cols` buffer.
pub fn forward_2d(
    data: &mut [f64],
    rows: usize,
    cols: usize,
    levels: usize,
    lo: &[f64],
    hi: &[f64],
) {
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        transform_block(data, cols, r, c, lo, hi, false);
        r /= 2;
        c /= 2;
    }
}

/// Full inverse transform, in place.
pub fn inverse_2d(
    data: &mut [f64],
    rows: usize,
    cols: usize,
    levels: usize,
    lo: &[f64],
    hi: &[f64],
) {
    let mut dims = Vec::with_capacity(levels);
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        dims.push((r, c));
        r /= 2;
        c /= 2;
    }
    for &(r, c) in dims.iter().rev() {
        transform_block(data, cols, r, c, lo, hi, true);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Coarsest approximation band.
    LL,
    LH,
    HL,
    HH,
}

/// One subband of the in-place layout: the block of coefficients sharing a
/// scale and orientation.
#[derive(Clone, Copy, Debug)]
pub struct Subband {
    pub level: usize,
    pub orientation: Orientation,
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Subband {
    pub fn contains(&self, r: usize, c: usize) -> bool {
        r >= self.row0 && r < self.row0 + self.rows && c >= self.col0 && c < self.col0 + self.cols
    }
}

/// Subband blocks of the in-place layout, coarsest (LL) first.
pub fn subbands(rows: usize, cols: usize, levels: usize) -> Vec<Subband> {
    let mut out = Vec::with_capacity(3 * levels + 1);
    let (lr, lc) = (rows >> levels, cols >> levels);
    out.push(Subband {
        level: levels,
        orientation: Orientation::LL,
        row0: 0,
        col0: 0,
        rows: lr,
        cols: lc,
    });
    for level in (1..=levels).rev() {
        let (br, bc) = (rows >> level, cols >> level);
        out.push(Subband {
            level,
            orientation: Orientation::HL,
            row0: 0,
            col0: bc,
            rows: br,
            cols: bc,
        });
        out.push(Subband {
            level,
            orientation: Orientation::LH,
            row0: br,
            col0: 0,
            rows: br,
            cols: bc,
        });
        out.push(Subband {
            level,
            orientation: Orientation::HH,
            row0: br,
            col0: bc,
            rows: br,
            cols: bc,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowpass_sums_to_sqrt2() {
        for taps in [2, 4, 6, 8, 12] {
            let lo = lowpass_taps(taps).unwrap();
            let sum: f64 = lo.iter().sum();
            assert!(
                (sum - std::f64::consts::SQRT_2).abs() < 1e-12,
                "taps {taps}: sum {sum}"
            );
        }
    }

    #[test]
    fn quadrature_mirror_property() {
        // sum_k h[k] h[k + 2m] = delta(m) for every supported family.
        for taps in [2, 4, 6, 8, 12] {
            let lo = lowpass_taps(taps).unwrap();
            for m in 0..taps / 2 {
                let acc: f64 = (0..taps - 2 * m).map(|k| lo[k] * lo[k + 2 * m]).sum();
                let expect = if m == 0 { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12, "taps {taps}, m {m}: {acc}");
            }
        }
    }

    #[test]
    fn haar_2x2_approximation_is_half_sum() {
        let lo = lowpass_taps(2).unwrap();
        let hi = highpass_from_lowpass(lo);
        let mut data = vec![1.0, 2.0, 3.0, 4.0];
        forward_2d(&mut data, 2, 2, 1, lo, &hi);
        assert!((data[0] - 5.0).abs() < 1e-12); // (1+2+3+4)/2
    }

    #[test]
    fn perfect_reconstruction_all_families() {
        for taps in [2, 4, 6, 8, 12] {
            let lo = lowpass_taps(taps).unwrap();
            let hi = highpass_from_lowpass(lo);
            let orig: Vec<f64> = (0..256).map(|v| ((v * 7 + 3) % 23) as f64).collect();
            let mut data = orig.clone();
            forward_2d(&mut data, 16, 16, 2, lo, &hi);
            inverse_2d(&mut data, 16, 16, 2, lo, &hi);
            for (a, b) in orig.iter().zip(&data) {
                assert!((a - b).abs() < 1e-10, "taps {taps}");
            }
        }
    }

    #[test]
    fn subband_layout_covers_everything_once() {
        let bands = subbands(16, 8, 2);
        let mut seen = [0u8; 16 * 8];
        for b in &bands {
            for r in b.row0..b.row0 + b.rows {
                for c in b.col0..b.col0 + b.cols {
                    seen[r * 8 + c] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&v| v == 1));
    }
}
