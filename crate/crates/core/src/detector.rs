//! Maximum–minimum eigenvalue (MME) spectrum sensing under stable
//! interference.
//!
//! Received samples are stacked into `L` consecutive time shifts; the test
//! statistic is `λ_max / λ_min` of their sample covariance. White noise
//! gives a ratio near one, a correlated primary signal spreads the
//! eigenvalues. Thresholds are calibrated by Monte Carlo under H0.

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AnalyticError, StableLaw};
use crate::mcsim::{stable_sample, SimError};
use crate::rng::{derive_seed, trial_rng};

/// Primary channel taps, normalised to unit energy on use.
pub const CHANNEL_TAPS: [f64; 4] = [0.8, 0.5, 0.3, 0.1];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DetectorError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("{trials} calibration trials are too few for target Pfa {pfa}: need at least {required}")]
    InsufficientTrials { trials: usize, pfa: f64, required: usize },
    #[error("sample covariance is rank deficient (eigenvalues {min:e} .. {max:e})")]
    RankDeficient { min: f64, max: f64 },
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    H0,
    H1,
}

/// `−½ ln(2πe)`: `∫ f ln f` of a unit-variance Gaussian.
pub fn gaussian_reference_delta() -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Samples per sensing window, N.
    pub n_samples: usize,
    /// Number of consecutive time shifts stacked per column, L.
    pub smoothing_factor: usize,
    pub target_pfa: f64,
    /// Interference uncertainty feeding the threshold; no adjustment if unset.
    pub delta: Option<f64>,
    pub reference_delta: f64,
    /// Sensitivity of the threshold to `delta − reference_delta`.
    pub beta: f64,
    /// Interference-to-noise ratio in dB at the median interference level.
    pub inr_db: f64,
    pub snr_grid_db: Vec<f64>,
    /// H1 trials per SNR point.
    pub trials: usize,
    /// Fresh H0 trials used to measure the achieved false-alarm rate.
    pub holdout_trials: usize,
    /// H0 trials used to set the threshold.
    pub calibration_trials: usize,
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            smoothing_factor: 8,
            target_pfa: 0.1,
            delta: None,
            reference_delta: gaussian_reference_delta(),
            beta: 0.1,
            inr_db: -5.0,
            snr_grid_db: (0..8).map(|i| -22.0 + 2.0 * i as f64).collect(),
            trials: 2_000,
            holdout_trials: 10_000,
            calibration_trials: 10_000,
            seed: 1,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: String| Err(DetectorError::InvalidConfig(m));
        if self.smoothing_factor < 2 {
            return bad(format!("smoothing_factor must be >= 2, got {}", self.smoothing_factor));
        }
        if self.n_samples <= self.smoothing_factor {
            return bad(format!(
                "n_samples ({}) must exceed smoothing_factor ({})",
                self.n_samples, self.smoothing_factor
            ));
        }
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return bad(format!("target_pfa must lie in (0, 1), got {}", self.target_pfa));
        }
        if self.trials == 0 || self.holdout_trials == 0 {
            return bad("trials and holdout_trials must be >= 1".into());
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return bad("snr_grid_db entries must be finite".into());
        }
        if self.inr_db.is_nan() || self.inr_db == f64::INFINITY {
            return bad(format!("inr_db must be finite or -inf, got {}", self.inr_db));
        }
        if !self.beta.is_finite() || !self.reference_delta.is_finite() {
            return bad("beta and reference_delta must be finite".into());
        }
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return bad(format!("delta must be finite, got {d}"));
            }
        }
        Ok(())
    }

    fn required_calibration_trials(&self) -> usize {
        (50.0 / self.target_pfa).ceil() as usize
    }
}

/// Interference law plus the median used to normalise its power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSource {
    pub law: StableLaw,
    pub median: f64,
}

impl InterferenceSource {
    pub fn new(law: StableLaw) -> Result<Self, DetectorError> {
        Ok(Self {
            law,
            median: law.quantile(0.5)?,
        })
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One sensing window as an `L × N` matrix whose row `l` is the received
/// sequence delayed by `l` samples.
///
/// Noise is unit-variance white Gaussian. Interference is quasi-static
/// over the window: one stable draw `I` sets an extra white Gaussian
/// component of variance `INR · I / median(I)`. Under H1 a BPSK sequence filtered by
/// [`CHANNEL_TAPS`] is added at the given SNR. The random draws are made
/// in the same order for every SNR, so one stream gives common random
/// numbers across an SNR sweep.
pub fn generate_received<R: Rng + ?Sized>(
    snr_db: f64,
    cfg: &DetectorConfig,
    hypothesis: Hypothesis,
    source: &InterferenceSource,
    rng: &mut R,
) -> Result<DMatrix<f64>, DetectorError> {
    let x = received_sequence(snr_db, cfg, hypothesis, source, rng)?;
    Ok(DMatrix::from_fn(cfg.smoothing_factor, cfg.n_samples, |i, j| x[i + j]))
}

/// The `N + L − 1` received samples behind [`generate_received`].
fn received_sequence<R: Rng + ?Sized>(
    snr_db: f64,
    cfg: &DetectorConfig,
    hypothesis: Hypothesis,
    source: &InterferenceSource,
    rng: &mut R,
) -> Result<Vec<f64>, DetectorError> {
    let l = cfg.smoothing_factor;
    let len = cfg.n_samples + l - 1;
    let taps = CHANNEL_TAPS.len();
    // noise and interference are independent white Gaussians; draw their sum
    let inr = db_to_linear(cfg.inr_db);
    let interference_var = if inr > 0.0 {
        inr * stable_sample(&source.law, 1, rng)?[0] / source.median
    } else {
        0.0
    };
    let sigma = (1.0 + interference_var).sqrt();
    let mut x: Vec<f64> = (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();

    if hypothesis == Hypothesis::H1 {
        let norm = CHANNEL_TAPS.iter().map(|h| h * h).sum::<f64>().sqrt();
        let amp = db_to_linear(snr_db).sqrt() / norm;
        let symbols: Vec<f64> = (0..len + taps - 1)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        for (n, v) in x.iter_mut().enumerate() {
            let s: f64 = CHANNEL_TAPS
                .iter()
                .enumerate()
                .map(|(j, h)| h * symbols[n + taps - 1 - j])
                .sum();
            *v += amp * s;
        }
    }
    Ok(x)
}

/// `(1/N) X Xᵀ` for the shift matrix of `x` without building `X`: along
/// each diagonal consecutive entries differ by one product at either end.
fn shift_covariance(x: &[f64], l: usize, n: usize) -> DMatrix<f64> {
    let mut cov = DMatrix::zeros(l, l);
    for d in 0..l {
        let mut s: f64 = (0..n).map(|j| x[j] * x[j + d]).sum();
        for i in 0..l - d {
            if i > 0 {
                s += x[i + n - 1] * x[i + n - 1 + d] - x[i - 1] * x[i - 1 + d];
            }
            cov[(i, i + d)] = s / n as f64;
            cov[(i + d, i)] = s / n as f64;
        }
    }
    cov
}

/// `λ_max / λ_min` of `(1/N) X Xᵀ`.
pub fn mme_statistic(samples: &DMatrix<f64>) -> Result<f64, DetectorError> {
    let (l, n) = samples.shape();
    if n <= l {
        return Err(DetectorError::InvalidConfig(format!("need N > L, got N = {n}, L = {l}")));
    }
    eigen_ratio(samples * samples.transpose() / n as f64)
}

fn eigen_ratio(cov: DMatrix<f64>) -> Result<f64, DetectorError> {
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if !(min > 0.0) || min <= max * 1e-13 {
        return Err(DetectorError::RankDeficient { min, max });
    }
    Ok(max / min)
}

fn statistics(
    cfg: &DetectorConfig,
    source: &InterferenceSource,
    hypothesis: Hypothesis,
    snr_db: f64,
    purpose: &str,
    trials: usize,
) -> Result<Vec<f64>, DetectorError> {
    let seed = derive_seed(cfg.seed, purpose);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let x = received_sequence(snr_db, cfg, hypothesis, source, &mut rng)?;
            eigen_ratio(shift_covariance(&x, cfg.smoothing_factor, cfg.n_samples))
        })
        .collect()
}

/// Empirical `(1 − target_pfa)` quantile of the H0 statistic over
/// `calibration_trials` runs.
pub fn calibrate_threshold(cfg: &DetectorConfig, source: &InterferenceSource) -> Result<f64, DetectorError> {
    cfg.validate()?;
    let required = cfg.required_calibration_trials();
    if cfg.calibration_trials < required {
        return Err(DetectorError::InsufficientTrials {
            trials: cfg.calibration_trials,
            pfa: cfg.target_pfa,
            required,
        });
    }
    let mut stats = statistics(cfg, source, Hypothesis::H0, 0.0, "h0-calibration", cfg.calibration_trials)?;
    stats.sort_by(f64::total_cmp);
    let n = stats.len();
    let idx = ((1.0 - cfg.target_pfa) * n as f64).ceil() as usize;
    Ok(stats[idx.clamp(1, n) - 1])
}

/// `threshold · exp(β (δ − δ_ref))`.
pub fn adjust_threshold(threshold: f64, delta: f64, reference_delta: f64, beta: f64) -> f64 {
    threshold * (beta * (delta - reference_delta)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionCurve {
    pub snr_db: Vec<f64>,
    pub pd: Vec<f64>,
    /// Fraction of held-out H0 trials above the threshold in use.
    pub pfa_achieved: f64,
    /// Threshold in use (after any δ adjustment).
    pub threshold: f64,
    pub threshold_calibrated: f64,
    pub interference_median: f64,
}

impl DetectionCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "snr_db,pd")?;
        for (s, p) in self.snr_db.iter().zip(&self.pd) {
            writeln!(w, "{s},{p}")?;
        }
        Ok(())
    }
}

fn exceed_fraction(stats: &[f64], threshold: f64) -> f64 {
    stats.iter().filter(|&&s| s > threshold).count() as f64 / stats.len() as f64
}

/// Calibrates, applies the δ adjustment if configured, checks the false
/// alarm rate on fresh H0 trials and sweeps the SNR grid.
pub fn detection_curve(cfg: &DetectorConfig, law: &StableLaw) -> Result<DetectionCurve, DetectorError> {
    cfg.validate()?;
    let source = InterferenceSource::new(*law)?;
    let calibrated = calibrate_threshold(cfg, &source)?;
    let threshold = match cfg.delta {
        Some(delta) => adjust_threshold(calibrated, delta, cfg.reference_delta, cfg.beta),
        None => calibrated,
    };
    let holdout = statistics(cfg, &source, Hypothesis::H0, 0.0, "h0-holdout", cfg.holdout_trials)?;
    let pd = cfg
        .snr_grid_db
        .iter()
        .map(|&snr| {
            let stats = statistics(cfg, &source, Hypothesis::H1, snr, "h1", cfg.trials)?;
            Ok(exceed_fraction(&stats, threshold))
        })
        .collect::<Result<Vec<_>, DetectorError>>()?;
    Ok(DetectionCurve {
        snr_db: cfg.snr_grid_db.clone(),
        pd,
        pfa_achieved: exceed_fraction(&holdout, threshold),
        threshold,
        threshold_calibrated: calibrated,
        interference_median: source.median,
    })
}
