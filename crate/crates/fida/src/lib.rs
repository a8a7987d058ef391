//! Restoration toolkit for linear inverse problems `y = Ax + noise`.
//!
//! The centerpiece is the filtered iterative denoising solver: an iterative
//! denoising loop whose gradient step is premultiplied by a transform-domain
//! filter built from the per-atom attenuations of the forward operator, so a
//! fixed off-the-shelf denoiser works across different operators. Baseline
//! iterative denoising and a one-shot thresholding estimator are included,
//! along with the forward operators, bases, and benchmark harness used to
//! exercise them.

pub mod denoise;
pub mod error;
pub mod fft;
pub mod harness;
pub mod image;
pub mod io;
pub mod operators;
pub mod rng;
pub mod solver;
pub mod spectrum;
pub mod transforms;
pub mod util;

pub use error::{FidaError, Result};
pub use image::{psnr, Image};
pub use rng::{add_gaussian_noise, RngSeed};
