//! End-to-end denoising pipeline: signal segmentation, SNR-calibrated
//! noise injection, the relative reconstruction-error metric, and the
//! seeded experiment driver.

mod experiment;
mod rir;

pub use experiment::{
    derive_stream_seed, run_experiment, DataConfig, ExperimentConfig, ExperimentReport, Method,
    ReportCell, SegmentationConfig, TrainingConfig,
};
pub use rir::{gen_image_rir, gen_synthetic_rir, RoomSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::polymat::PolyMatrix;
use crate::sparsecode::{code_matrix, CodeConfig, Coder};

/// How raw signals map onto polynomial matrices: consecutive
/// `segment_len`-sample chunks become polynomial entries (`segment_len`
/// doubles as the lag count), and chunks fill the matrix column-major so
/// temporally adjacent segments share a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentationSpec {
    pub rows: usize,
    pub segment_len: usize,
}

impl SegmentationSpec {
    pub fn new(rows: usize, segment_len: usize) -> Self {
        Self { rows, segment_len }
    }

    fn block(&self) -> usize {
        self.rows * self.segment_len
    }
}

/// Splits a signal into a polynomial matrix. Chunk `s` lands at row
/// `s % rows`, column `s / rows`; chunk sample `t` becomes the lag-`t`
/// coefficient. The signal length must divide evenly.
pub fn segment(signal: &[f64], spec: &SegmentationSpec) -> Result<PolyMatrix> {
    if spec.rows == 0 || spec.segment_len == 0 {
        return Err(Error::InvalidConfig(
            "segmentation dims must be positive".into(),
        ));
    }
    if signal.is_empty() || !signal.len().is_multiple_of(spec.block()) {
        return Err(Error::ShapeMismatch(format!(
            "signal length {} not divisible by rows*segment_len = {}",
            signal.len(),
            spec.block()
        )));
    }
    let cols = signal.len() / spec.block();
    PolyMatrix::from_fn(spec.rows, cols, spec.segment_len, |l, i, j| {
        let chunk = j * spec.rows + i;
        signal[chunk * spec.segment_len + l]
    })
}

/// Exact inverse of [`segment`]: reassembles the flat signal.
pub fn desegment(m: &PolyMatrix) -> Vec<f64> {
    let (p, q, lags) = (m.rows(), m.cols(), m.lags());
    let mut signal = vec![0.0; p * q * lags];
    for j in 0..q {
        for i in 0..p {
            let chunk = j * p + i;
            for l in 0..lags {
                signal[chunk * lags + l] = m.get(l, i, j);
            }
        }
    }
    signal
}

/// Segments every signal and concatenates the results horizontally, in
/// input order. All signals must share a length.
pub fn build_training_matrix(signals: &[Vec<f64>], spec: &SegmentationSpec) -> Result<PolyMatrix> {
    let first_len = signals
        .first()
        .map(|s| s.len())
        .ok_or_else(|| Error::ShapeMismatch("no signals".into()))?;
    if let Some(bad) = signals.iter().find(|s| s.len() != first_len) {
        return Err(Error::ShapeMismatch(format!(
            "signal lengths differ: {} vs {}",
            first_len,
            bad.len()
        )));
    }
    let parts: Vec<PolyMatrix> = signals
        .iter()
        .map(|s| segment(s, spec))
        .collect::<Result<_>>()?;
    PolyMatrix::hconcat(&parts)
}

/// Noise level and the seed that fixes the realization exactly.
/// `snr_db = f64::INFINITY` means clean (no noise added).
#[derive(Clone, Copy, Debug)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Adds white Gaussian noise scaled so the realized SNR equals
/// `snr_db` exactly: the drawn noise block is rescaled against its own
/// realized power, where power is the mean squared coefficient over the
/// whole matrix.
pub fn add_noise(m: &PolyMatrix, spec: &NoiseSpec) -> Result<PolyMatrix> {
    if spec.snr_db == f64::INFINITY {
        return Ok(m.clone());
    }
    let count = m.coeffs().len();
    let signal_power = m.fnorm_sq() / count as f64;
    if signal_power == 0.0 {
        return Err(Error::ZeroSignal(
            "SNR undefined for an all-zero signal".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise: Vec<f64> = (0..count)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let noise_power = noise.iter().map(|e| e * e).sum::<f64>() / count as f64;
    if noise_power == 0.0 {
        return Err(Error::ZeroSignal("degenerate all-zero noise draw".into()));
    }
    let target_noise_power = signal_power * 10f64.powf(-spec.snr_db / 10.0);
    let alpha = (target_noise_power / noise_power).sqrt();
    let coeffs = m
        .coeffs()
        .iter()
        .zip(&noise)
        .map(|(c, e)| c + alpha * e)
        .collect();
    PolyMatrix::from_coeffs(m.rows(), m.cols(), m.lags(), coeffs)
}

/// Relative squared F-norm reconstruction error
/// `||Y - Y_hat||_F^2 / ||Y||_F^2`.
pub fn reconstruction_error(y: &PolyMatrix, y_hat: &PolyMatrix) -> Result<f64> {
    let den = y.fnorm_sq();
    if den == 0.0 {
        return Err(Error::ZeroSignal(
            "reconstruction error undefined for a zero reference".into(),
        ));
    }
    Ok(y.sub(y_hat)?.fnorm_sq() / den)
}

/// Codes every column of the noisy matrix against the dictionary and
/// reassembles the sparse reconstruction.
pub fn denoise(
    noisy: &PolyMatrix,
    dict: &PolyMatrix,
    cfg: &CodeConfig,
    coder: Coder,
) -> Result<PolyMatrix> {
    let codes = code_matrix(noisy, dict, cfg, coder)?;
    dict.mul_scalar_right(codes.data())
}
