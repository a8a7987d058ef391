//! Thin 2-D FFT helpers on top of rustfft.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::default());
}

#[derive(Default)]
struct PlanCache {
    planner: Option<FftPlanner<f64>>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn with_plan(len: usize, inverse: bool, f: impl FnOnce(&Arc<dyn Fft<f64>>)) {
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let planner = cache.planner.get_or_insert_with(FftPlanner::new);
        let plan = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let map = if inverse {
            &mut cache.inverse
        } else {
            &mut cache.forward
        };
        let plan = map.entry(len).or_insert(plan).clone();
        drop(cache);
        f(&plan);
    });
}

fn transform_2d(spec: &mut [Complex<f64>], rows: usize, cols: usize, inverse: bool) {
    with_plan(cols, inverse, |plan| {
        for r in 0..rows {
            plan.process(&mut spec[r * cols..(r + 1) * cols]);
        }
    });
    let mut col = vec![Complex::default(); rows];
    with_plan(rows, inverse, |plan| {
        for c in 0..cols {
            for r in 0..rows {
                col[r] = spec[r * cols + c];
            }
            plan.process(&mut col);
            for r in 0..rows {
                spec[r * cols + c] = col[r];
            }
        }
    });
}

/// Unnormalized forward 2-D DFT of a real field.
pub fn fft2(data: &[f64], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    debug_assert_eq!(data.len(), rows * cols);
    let mut spec: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform_2d(&mut spec, rows, cols, false);
    spec
}

/// Inverse 2-D DFT normalized by `1/(rows*cols)`; returns the real part.
pub fn ifft2_real(spec: &[Complex<f64>], rows: usize, cols: usize) -> Vec<f64> {
    let mut spec = spec.to_vec();
    transform_2d(&mut spec, rows, cols, true);
    let scale = 1.0 / (rows * cols) as f64;
    spec.iter().map(|v| v.re * scale).collect()
}

/// Inverse 2-D DFT normalized by `1/(rows*cols)`, complex output.
pub fn ifft2(spec: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut spec = spec.to_vec();
    transform_2d(&mut spec, rows, cols, true);
    let scale = 1.0 / (rows * cols) as f64;
    spec.iter().map(|v| v * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip() {
        let data: Vec<f64> = (0..24).map(|v| (v as f64).sin() * 10.0).collect();
        let spec = fft2(&data, 4, 6);
        let back = ifft2_real(&spec, 4, 6);
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_term_is_sum() {
        let data = vec![1.0, 2.0, 3.0, 4.0];
        let spec = fft2(&data, 2, 2);
        assert!((spec[0].re - 10.0).abs() < 1e-12);
        assert!(spec[0].im.abs() < 1e-12);
    }
}
