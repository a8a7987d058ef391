//! Dense real-valued image container and quality metrics.

use crate::error::{FidaError, Result};

/// A dense 2-D grid of real values, row-major.
///
/// Pixel values are nominally in `[0, 255]` but are never clamped here:
/// degraded observations and solver iterates legitimately leave that range,
/// and quantization only happens at 8-bit export time.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FidaError::arg("image dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(FidaError::shape(
                rows * cols,
                data.len(),
                "image data length",
            ));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(FidaError::NonFinite("image data"));
        }
        Ok(Image { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Image {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Self {
        Image {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Image) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self + scale * other`, elementwise.
    pub fn axpy(&self, scale: f64, other: &Image) -> Image {
        debug_assert!(self.same_shape(other));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Image {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Image) -> Image {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> Image {
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cyclic_shift(&self, dr: isize, dc: isize) -> Image {
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let sr = ((r as isize + dr).rem_euclid(rows)) as usize;
                let sc = ((c as isize + dc).rem_euclid(cols)) as usize;
                out[sr * self.cols + sc] = self.data[r * self.cols + c];
            }
        }
        Image {
            rows: self.rows,
            cols: self.cols,
            data: out,
        }
    }
}

/// Peak signal-to-noise ratio in dB with peak fixed at 255.
///
/// Returns `+inf` when the two images are identical.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    if !reference.same_shape(test) {
        return Err(FidaError::shape(
            format!("{:?}", reference.shape()),
            format!("{:?}", test.shape()),
            "psnr",
        ));
    }
    let n = reference.len() as f64;
    let mse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}
