//! Per-atom attenuation spectrum of a forward operator in a given basis, and
//! the transform-domain gradient filter built from it.
//!
//! The spectrum holds `delta_j = ||A psi_j||_2` for every basis atom. The
//! gradient filter synthesizes a reweighted analysis of its input, where the
//! weights are the pseudo-inverse, Wiener-regularized, or 0/1-masked deltas.
//! Applying that filter to the plain least-squares gradient `A^T (Ax - y)`
//! rescales each transform component by the inverse attenuation the operator
//! inflicts on it.

use rayon::prelude::*;

use crate::error::{FidaError, Result};
use crate::image::Image;
use crate::operators::ForwardOperator;
use crate::transforms::{dft_pack, CoeffLayout, OrthoBasis};

/// Entries with `delta <= zero_tol * max(delta)` are treated as exact zeros.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Refuse the exact (per-atom) strategy above this coefficient count unless
/// forced; it costs one operator application per atom.
pub const EXACT_STRATEGY_CAP: usize = 256 * 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// One synthesized atom and operator application per coefficient.
    Exact { force: bool },
    /// One representative atom per wavelet subband; exact for shift-invariant
    /// operators because subband atoms are cyclic shifts of each other.
    PerSubband,
    /// Pointwise kernel transfer-function magnitudes; requires a circular
    /// convolution operator with the DFT basis.
    Frequency,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// `1/delta` where `delta` is above threshold, else 0.
    PseudoInverse,
    /// `delta / (delta^2 + tau)`, finite everywhere.
    Wiener { tau: f64 },
    /// 1 where `delta` is above threshold, else 0.
    Mask,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    deltas: Vec<f64>,
    weights: Vec<f64>,
    zero_tol: f64,
    mode: Mode,
    layout: CoeffLayout,
    basis_id: u64,
    /// True when every weight is exactly 1, letting the filter short-circuit
    /// to the identity (and keeping trivial cases bit-exact).
    identity: bool,
}

impl Spectrum {
    pub fn from_deltas(
        deltas: Vec<f64>,
        layout: CoeffLayout,
        basis_id: u64,
        mode: Mode,
        zero_tol: f64,
    ) -> Result<Self> {
        if deltas.len() != layout.len() {
            return Err(FidaError::shape(
                layout.len(),
                deltas.len(),
                "spectrum length",
            ));
        }
        if deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(FidaError::arg("deltas must be finite and nonnegative"));
        }
        if let Mode::Wiener { tau } = mode {
            if tau.is_nan() || tau <= 0.0 {
                return Err(FidaError::arg(format!(
                    "wiener tau must be positive, got {tau}"
                )));
            }
        }
        let weights = compute_weights(&deltas, mode, zero_tol);
        let identity = weights.iter().all(|&w| w == 1.0);
        Ok(Spectrum {
            deltas,
            weights,
            zero_tol,
            mode,
            layout,
            basis_id,
            identity,
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn layout(&self) -> &CoeffLayout {
        &self.layout
    }

    pub fn basis_id(&self) -> u64 {
        self.basis_id
    }

    pub fn max_delta(&self) -> f64 {
        self.deltas.iter().cloned().fold(0.0, f64::max)
    }

    /// Same deltas, different weighting mode.
    pub fn reweight(&self, mode: Mode) -> Result<Spectrum> {
        Spectrum::from_deltas(
            self.deltas.clone(),
            self.layout.clone(),
            self.basis_id,
            mode,
            self.zero_tol,
        )
    }

    /// Apply the transform-domain filter `psi * diag(weights) * psi^T`.
    pub fn apply_filter(&self, basis: &OrthoBasis, r: &Image) -> Result<Image> {
        self.check_basis(basis)?;
        if r.shape() != basis.shape() {
            return Err(FidaError::shape(
                format!("{:?}", basis.shape()),
                format!("{:?}", r.shape()),
                "apply_filter",
            ));
        }
        if self.identity {
            return Ok(r.clone());
        }
        let mut c = basis.analyze(r)?;
        for (v, w) in c.values.iter_mut().zip(&self.weights) {
            *v *= w;
        }
        basis.synthesize(&c)
    }

    fn check_basis(&self, basis: &OrthoBasis) -> Result<()> {
        if basis.id() != self.basis_id {
            return Err(FidaError::arg(
                "spectrum was computed against a different basis".to_string(),
            ));
        }
        if basis.layout() != self.layout {
            return Err(FidaError::shape(
                format!("{:?}", self.layout),
                format!("{:?}", basis.layout()),
                "spectrum layout",
            ));
        }
        Ok(())
    }
}

fn compute_weights(deltas: &[f64], mode: Mode, zero_tol: f64) -> Vec<f64> {
    let max = deltas.iter().cloned().fold(0.0, f64::max);
    let cut = zero_tol * max;
    deltas
        .iter()
        .map(|&d| match mode {
            Mode::PseudoInverse => {
                if d > cut && d > 0.0 {
                    1.0 / d
                } else {
                    0.0
                }
            }
            Mode::Wiener { tau } => d / (d * d + tau),
            Mode::Mask => {
                if d > cut && d > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Compute `delta_j = ||A psi_j||_2` for every atom of the basis.
///
/// The result carries pseudo-inverse weights and the default zero tolerance;
/// use [`Spectrum::reweight`] to switch modes.
pub fn compute_deltas(
    op: &ForwardOperator,
    basis: &OrthoBasis,
    strategy: Strategy,
) -> Result<Spectrum> {
    if basis.shape() != op.input_shape() {
        return Err(FidaError::shape(
            format!("{:?}", op.input_shape()),
            format!("{:?}", basis.shape()),
            "compute_deltas",
        ));
    }
    let deltas = match strategy {
        Strategy::Exact { force } => exact_deltas(op, basis, force)?,
        Strategy::PerSubband => per_subband_deltas(op, basis)?,
        Strategy::Frequency => frequency_deltas(op, basis)?,
    };
    Spectrum::from_deltas(
        deltas,
        basis.layout(),
        basis.id(),
        Mode::PseudoInverse,
        DEFAULT_ZERO_TOL,
    )
}

fn exact_deltas(op: &ForwardOperator, basis: &OrthoBasis, force: bool) -> Result<Vec<f64>> {
    // Stored singular values are already exact for the SVD basis.
    if let Some(b) = basis.as_svd() {
        return Ok(b.singular_values().to_vec());
    }
    // Diagonal operator in the canonical basis: A e_j is the gain itself.
    if let (Some(gains), OrthoBasis::Canonical { .. }) = (op.gains(), basis) {
        return Ok(gains.iter().map(|g| g.abs()).collect());
    }
    let n = basis.coeff_len();
    if n > EXACT_STRATEGY_CAP && !force {
        return Err(FidaError::arg(format!(
            "exact strategy over {n} atoms exceeds the cap of {EXACT_STRATEGY_CAP}; \
             use a structured strategy or force"
        )));
    }
    (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let atom = basis.synthesize_values(&e)?;
            Ok(op.apply(&atom)?.norm())
        })
        .collect()
}

fn per_subband_deltas(op: &ForwardOperator, basis: &OrthoBasis) -> Result<Vec<f64>> {
    if !op.is_convolution() {
        return Err(FidaError::arg(
            "per-subband strategy requires a shift-invariant (convolution) operator",
        ));
    }
    let bands = basis
        .subbands()
        .ok_or_else(|| FidaError::arg("per-subband strategy requires a wavelet basis"))?;
    let n = basis.coeff_len();
    let (_, cols) = basis.shape();
    let mut deltas = vec![0.0; n];
    for band in bands {
        let mut e = vec![0.0; n];
        e[band.row0 * cols + band.col0] = 1.0;
        let atom = basis.synthesize_values(&e)?;
        let delta = op.apply(&atom)?.norm();
        for r in band.row0..band.row0 + band.rows {
            for c in band.col0..band.col0 + band.cols {
                deltas[r * cols + c] = delta;
            }
        }
    }
    Ok(deltas)
}

fn frequency_deltas(op: &ForwardOperator, basis: &OrthoBasis) -> Result<Vec<f64>> {
    let (kernel, krows, kcols) = op.kernel().ok_or_else(|| {
        FidaError::arg("frequency strategy requires a circular convolution operator")
    })?;
    let (rows, cols) = match basis {
        OrthoBasis::Dft { rows, cols } => (*rows, *cols),
        _ => return Err(FidaError::arg("frequency strategy requires the dft basis")),
    };
    let spec = op.kernel_spectrum(kernel, krows, kcols);
    let mags: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    Ok(dft_pack::pack_magnitudes(&mags, rows, cols))
}

/// The filtered least-squares gradient
/// `psi * diag(weights) * psi^T * A^T (Ax - y)`.
pub fn filtered_gradient(
    x: &Image,
    y: &Image,
    op: &ForwardOperator,
    basis: &OrthoBasis,
    spec: &Spectrum,
) -> Result<Image> {
    let residual = op.apply(x)?.sub(y);
    let grad = op.adjoint(&residual)?;
    spec.apply_filter(basis, &grad)
}

/// The exact gradient of the filtered data-fit objective, from stored SVD
/// factors: per coefficient `delta_j * (psi^T x)_j - (phi^T y)_j` where
/// `delta_j` is above threshold, 0 otherwise, synthesized back through psi.
pub fn exact_gradient_svd(x: &Image, y: &Image, basis: &OrthoBasis) -> Result<Image> {
    let b = basis
        .as_svd()
        .ok_or_else(|| FidaError::arg("exact_gradient_svd requires an svd basis"))?;
    let theta = basis.analyze(x)?;
    let z = b.phi_transpose_apply(y)?;
    let sv = b.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let cut = DEFAULT_ZERO_TOL * max;
    let g: Vec<f64> = theta
        .values
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let d = sv[j];
            if d > cut && d > 0.0 {
                d * t - z.get(j).copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect();
    basis.synthesize_values(&g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        make_convolution, make_explicit, make_gaussian_blur, make_stripe_gain, GainAxis,
    };
    use crate::rng::{GaussianSource, RngSeed};
    use crate::transforms::{make_canonical, make_dft_basis, make_svd_basis, make_wavelet_basis};

    fn rand_image(rows: usize, cols: usize, seed: u64) -> Image {
        let mut src = GaussianSource::new(RngSeed(seed));
        Image::new(
            rows,
            cols,
            (0..rows * cols).map(|_| src.next_gaussian()).collect(),
        )
        .unwrap()
    }

    fn identity_op(n: usize) -> ForwardOperator {
        crate::operators::make_gain_field((n, n), vec![1.0; n * n]).unwrap()
    }

    #[test]
    fn identity_operator_gives_unit_deltas() {
        let op = identity_op(8);
        for basis in [
            make_canonical((8, 8)),
            make_wavelet_basis((8, 8), 6, 2).unwrap(),
            make_dft_basis((8, 8)),
        ] {
            let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
            for &d in spec.deltas() {
                assert!((d - 1.0).abs() < 1e-12, "{}", basis.kind_name());
            }
        }
    }

    #[test]
    fn diagonal_gains_in_canonical_basis() {
        let gains = vec![2.0, 0.5, 1.0, 3.0];
        let op = make_stripe_gain((1, 4), &gains, GainAxis::Column).unwrap();
        let basis = make_canonical((1, 4));
        let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        assert_eq!(spec.deltas(), gains.as_slice());
    }

    #[test]
    fn per_subband_matches_exact_for_blur() {
        let op = make_gaussian_blur((16, 16), 2.0, 3).unwrap();
        let basis = make_wavelet_basis((16, 16), 6, 2).unwrap();
        let exact = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let sub = compute_deltas(&op, &basis, Strategy::PerSubband).unwrap();
        for (a, b) in exact.deltas().iter().zip(sub.deltas()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn frequency_matches_exact_for_blur() {
        let op = make_gaussian_blur((16, 16), 1.5, 3).unwrap();
        let basis = make_dft_basis((16, 16));
        let exact = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let freq = compute_deltas(&op, &basis, Strategy::Frequency).unwrap();
        for (a, b) in exact.deltas().iter().zip(freq.deltas()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn sign_flipping_kernel_uses_magnitude() {
        // 1x1 kernel [-1]: eigenvalues are all -1, deltas must be |.| = 1.
        let op = make_convolution((4, 4), vec![-1.0], 1, 1).unwrap();
        let basis = make_dft_basis((4, 4));
        let exact = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let freq = compute_deltas(&op, &basis, Strategy::Frequency).unwrap();
        for (a, b) in exact.deltas().iter().zip(freq.deltas()) {
            assert!((a - 1.0).abs() < 1e-12);
            assert!((b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn incompatible_strategy_rejected() {
        let gains = vec![1.0; 8];
        let op = make_stripe_gain((8, 8), &gains, GainAxis::Column).unwrap();
        let wav = make_wavelet_basis((8, 8), 2, 1).unwrap();
        assert!(compute_deltas(&op, &wav, Strategy::PerSubband).is_err());
        assert!(compute_deltas(&op, &make_dft_basis((8, 8)), Strategy::Frequency).is_err());
    }

    #[test]
    fn reweight_modes() {
        let layout = CoeffLayout::Flat { len: 3 };
        let spec = Spectrum::from_deltas(
            vec![2.0, 0.0, 0.5],
            layout,
            0,
            Mode::PseudoInverse,
            DEFAULT_ZERO_TOL,
        )
        .unwrap();
        assert_eq!(spec.weights(), &[0.5, 0.0, 2.0]);
        let mask = spec.reweight(Mode::Mask).unwrap();
        assert_eq!(mask.weights(), &[1.0, 0.0, 1.0]);
        let wiener = spec.reweight(Mode::Wiener { tau: 1.0 }).unwrap();
        assert!((wiener.weights()[0] - 2.0 / 5.0).abs() < 1e-15);
        assert_eq!(wiener.weights()[1], 0.0);
        assert!(spec.reweight(Mode::Wiener { tau: 0.0 }).is_err());
    }

    #[test]
    fn wiener_tends_to_pseudo_inverse() {
        let layout = CoeffLayout::Flat { len: 2 };
        let deltas = vec![1.0, 0.25];
        let pinv =
            Spectrum::from_deltas(deltas.clone(), layout.clone(), 0, Mode::PseudoInverse, 0.0)
                .unwrap();
        let wiener =
            Spectrum::from_deltas(deltas, layout, 0, Mode::Wiener { tau: 1e-12 }, 0.0).unwrap();
        for (a, b) in pinv.weights().iter().zip(wiener.weights()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn wiener_unit_delta_tau_one_gives_half() {
        let spec = Spectrum::from_deltas(
            vec![1.0],
            CoeffLayout::Flat { len: 1 },
            0,
            Mode::Wiener { tau: 1.0 },
            0.0,
        )
        .unwrap();
        assert_eq!(spec.weights(), &[0.5]);
    }

    #[test]
    fn identity_spectrum_filter_is_bitwise_identity() {
        let basis = make_wavelet_basis((8, 8), 6, 2).unwrap();
        let spec = Spectrum::from_deltas(
            vec![1.0; 64],
            basis.layout(),
            basis.id(),
            Mode::PseudoInverse,
            DEFAULT_ZERO_TOL,
        )
        .unwrap();
        let r = rand_image(8, 8, 41);
        let out = spec.apply_filter(&basis, &r).unwrap();
        assert_eq!(out, r);
    }

    #[test]
    fn canonical_weight_zeroes_first_pixel() {
        let basis = make_canonical((2, 2));
        let mut deltas = vec![1.0; 4];
        deltas[0] = 0.0;
        let spec = Spectrum::from_deltas(
            deltas,
            basis.layout(),
            basis.id(),
            Mode::Mask,
            DEFAULT_ZERO_TOL,
        )
        .unwrap();
        let r = Image::new(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let out = spec.apply_filter(&basis, &r).unwrap();
        assert_eq!(out.data(), &[0.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn filter_matches_dense_assembled_matrix() {
        // Compare against multiplication by the explicitly assembled
        // psi * diag(w) * psi^T.
        let basis = make_wavelet_basis((8, 8), 4, 2).unwrap();
        let n = 64;
        let mut src = GaussianSource::new(RngSeed(42));
        let deltas: Vec<f64> = (0..n).map(|_| src.next_uniform() * 2.0 + 0.1).collect();
        let spec = Spectrum::from_deltas(
            deltas.clone(),
            basis.layout(),
            basis.id(),
            Mode::PseudoInverse,
            DEFAULT_ZERO_TOL,
        )
        .unwrap();
        // Assemble the dense filter from basis atoms.
        let mut psi = vec![0.0; n * n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let atom = basis.synthesize_values(&e).unwrap();
            for i in 0..n {
                psi[i * n + j] = atom.data()[i];
            }
        }
        let r = rand_image(8, 8, 43);
        // dense: psi W psi^T r
        let mut ct = vec![0.0; n];
        for j in 0..n {
            ct[j] = (0..n).map(|i| psi[i * n + j] * r.data()[i]).sum::<f64>() / deltas[j];
        }
        let mut expect = vec![0.0; n];
        for i in 0..n {
            expect[i] = (0..n).map(|j| psi[i * n + j] * ct[j]).sum();
        }
        let got = spec.apply_filter(&basis, &r).unwrap();
        for (a, b) in got.data().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn filter_is_self_adjoint() {
        let basis = make_wavelet_basis((8, 8), 6, 2).unwrap();
        let mut src = GaussianSource::new(RngSeed(44));
        let deltas: Vec<f64> = (0..64).map(|_| src.next_uniform() + 0.2).collect();
        let spec = Spectrum::from_deltas(
            deltas,
            basis.layout(),
            basis.id(),
            Mode::PseudoInverse,
            DEFAULT_ZERO_TOL,
        )
        .unwrap();
        for t in 0..20 {
            let u = rand_image(8, 8, 600 + t);
            let v = rand_image(8, 8, 700 + t);
            let lhs = spec.apply_filter(&basis, &u).unwrap().dot(&v);
            let rhs = u.dot(&spec.apply_filter(&basis, &v).unwrap());
            assert!((lhs - rhs).abs() <= 1e-10 * u.norm() * v.norm());
        }
    }

    #[test]
    fn filtered_gradient_identity_operator_is_plain_residual() {
        let op = identity_op(8);
        let basis = make_wavelet_basis((8, 8), 6, 2).unwrap();
        let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let x = rand_image(8, 8, 45);
        let y = rand_image(8, 8, 46);
        let g = filtered_gradient(&x, &y, &op, &basis, &spec).unwrap();
        let expect = x.sub(&y);
        for (a, b) in g.data().iter().zip(expect.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn filtered_gradient_hand_computed_2d() {
        // A = diag(2, 0), canonical basis, x = (1,1), y = (4,7).
        let op = make_stripe_gain((1, 2), &[2.0, 0.0], GainAxis::Column).unwrap();
        let basis = make_canonical((1, 2));
        let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let x = Image::new(1, 2, vec![1.0, 1.0]).unwrap();
        let y = Image::new(1, 2, vec![4.0, 7.0]).unwrap();
        let g = filtered_gradient(&x, &y, &op, &basis, &spec).unwrap();
        assert_eq!(g.data(), &[-2.0, 0.0]);
    }

    #[test]
    fn filtered_gradient_matches_exact_svd_gradient() {
        let mut src = GaussianSource::new(RngSeed(47));
        let matrix: Vec<f64> = (0..100 * 100).map(|_| src.next_gaussian()).collect();
        let op = make_explicit(matrix, (10, 10), (10, 10)).unwrap();
        let basis = make_svd_basis(&op).unwrap();
        let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let x = rand_image(10, 10, 48);
        let y = rand_image(10, 10, 49);
        let filt = filtered_gradient(&x, &y, &op, &basis, &spec).unwrap();
        let exact = exact_gradient_svd(&x, &y, &basis).unwrap();
        let scale = exact.norm().max(1.0);
        for (a, b) in filt.data().iter().zip(exact.data()) {
            assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn exact_gradient_identity_is_difference() {
        let n = 6;
        let mut eye = vec![0.0; n * n * n * n];
        for i in 0..n * n {
            eye[i * n * n + i] = 1.0;
        }
        let op = make_explicit(eye, (n, n), (n, n)).unwrap();
        let basis = make_svd_basis(&op).unwrap();
        let x = rand_image(n, n, 50);
        let y = rand_image(n, n, 51);
        let g = exact_gradient_svd(&x, &y, &basis).unwrap();
        let expect = x.sub(&y);
        for (a, b) in g.data().iter().zip(expect.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_gradient_vanishes_on_consistent_data() {
        let mut src = GaussianSource::new(RngSeed(52));
        let matrix: Vec<f64> = (0..64 * 64).map(|_| src.next_gaussian()).collect();
        let op = make_explicit(matrix, (8, 8), (8, 8)).unwrap();
        let basis = make_svd_basis(&op).unwrap();
        let x = rand_image(8, 8, 53);
        let y = op.apply(&x).unwrap();
        let g = exact_gradient_svd(&x, &y, &basis).unwrap();
        assert!(g.norm() <= 1e-8 * y.norm(), "norm {}", g.norm());
    }

    #[test]
    fn zero_delta_components_never_influence_gradient() {
        // Gain with zeros: the filtered gradient is zero on killed pixels no
        // matter what the data says there.
        let op = make_stripe_gain((1, 4), &[1.0, 0.0, 2.0, 0.0], GainAxis::Column).unwrap();
        let basis = make_canonical((1, 4));
        let spec = compute_deltas(&op, &basis, Strategy::Exact { force: false }).unwrap();
        let x = rand_image(1, 4, 54);
        let y = rand_image(1, 4, 55);
        let g = filtered_gradient(&x, &y, &op, &basis, &spec).unwrap();
        assert_eq!(g.data()[1], 0.0);
        assert_eq!(g.data()[3], 0.0);
    }

    #[test]
    fn spectrum_rejects_wrong_basis() {
        let op = identity_op(4);
        let b1 = make_canonical((4, 4));
        let b2 = make_dft_basis((4, 4));
        let spec = compute_deltas(&op, &b1, Strategy::Exact { force: false }).unwrap();
        let r = rand_image(4, 4, 56);
        assert!(spec.apply_filter(&b2, &r).is_err());
    }
}
