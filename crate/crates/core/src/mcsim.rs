//! Monte Carlo ground truth for the interference law.
//!
//! A campaign draws a Poisson number of transmitters uniformly on the
//! admissible region, applies fading and `‖x‖^{-α}` path loss, and sums
//! the received powers at the origin. Trial `i` always uses the same
//! random stream, so results do not depend on the worker count.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::{FadingKind, InterferenceModel, StableLaw};
use crate::geometry::{admissible_half_width, contains, lune, GeometryError, Point2D, RegionSpec};
use crate::rng::{derive_seed, trial_rng, RNG_ALGORITHM};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid campaign parameters: {0}")]
    InvalidParams(String),
    #[error("transmitter at the receiver position: path loss is singular")]
    Singularity,
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CampaignParams {
    pub model: InterferenceModel,
    pub n_trials: usize,
    pub seed: u64,
    /// Transmit power of every secondary node.
    pub tx_power: f64,
}

impl CampaignParams {
    pub fn new(model: InterferenceModel, n_trials: usize, seed: u64) -> Self {
        Self {
            model,
            n_trials,
            seed,
            tx_power: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_trials == 0 {
            return Err(SimError::InvalidParams("n_trials must be >= 1".into()));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(SimError::InvalidParams(format!("tx_power must be > 0, got {}", self.tx_power)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub samples: Vec<f64>,
    pub n_nodes: Vec<u64>,
    pub n_nodes_mean: f64,
    pub seed_used: u64,
    pub rng_algorithm: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub n_trials: usize,
    pub n_nodes_mean: f64,
    pub zero_fraction: f64,
    /// `(level, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

impl CampaignResult {
    pub fn summary(&self) -> CampaignSummary {
        let levels = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];
        let mut sorted = self.samples.clone();
        sorted.sort_by(f64::total_cmp);
        CampaignSummary {
            n_trials: self.samples.len(),
            n_nodes_mean: self.n_nodes_mean,
            zero_fraction: sorted.iter().filter(|&&v| v == 0.0).count() as f64 / sorted.len() as f64,
            quantiles: levels.iter().map(|&p| (p, quantile_sorted(&sorted, p))).collect(),
        }
    }

    /// Columns `trial_index,n_nodes,interference`, one row per trial.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "trial_index,n_nodes,interference")?;
        for (i, (n, v)) in self.n_nodes.iter().zip(&self.samples).enumerate() {
            writeln!(w, "{i},{n},{v:e}")?;
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

/// Uniform sampler on the admissible region.
///
/// Rejection from the enclosing disk while that accepts at least 1% of
/// draws; otherwise radii are drawn on the annulus that can contain
/// admissible points, thinned by the admissible arc fraction, and the
/// angle is drawn uniformly on that arc. Both are exact.
#[derive(Debug, Clone, Copy)]
pub struct RegionSampler {
    region: RegionSpec,
    area: f64,
    stratified: bool,
    rho_min: f64,
}

impl RegionSampler {
    pub fn new(region: &RegionSpec) -> Result<Self, SimError> {
        let geo = lune(region)?;
        let acceptance = geo.area / (PI * region.r_max * region.r_max);
        Ok(Self {
            region: *region,
            area: geo.area,
            stratified: acceptance < 0.01,
            rho_min: (region.r_p - region.r_dec).max(0.0).min(region.r_max),
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn is_stratified(&self) -> bool {
        self.stratified
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2D {
        let r_max = self.region.r_max;
        loop {
            let p = if self.stratified {
                let r0 = self.rho_min;
                let u: f64 = rng.sample(Open01);
                let rho = (r0 * r0 + u * (r_max * r_max - r0 * r0)).sqrt();
                let w = admissible_half_width(rho, &self.region);
                if rng.random::<f64>() * PI >= w {
                    continue;
                }
                let v: f64 = rng.random();
                let phi = PI - w * v;
                let phi = if rng.random::<bool>() { phi } else { -phi };
                Point2D::from_polar(rho, phi)
            } else {
                // 1 − U avoids a radius of exactly zero
                let rho = r_max * (1.0 - rng.random::<f64>()).sqrt();
                Point2D::from_polar(rho, 2.0 * PI * rng.random::<f64>())
            };
            if contains(&p, &self.region) {
                return p;
            }
        }
    }
}

fn sample_with<R: Rng + ?Sized>(sampler: &RegionSampler, lambda: f64, rng: &mut R) -> Vec<Point2D> {
    let mean = lambda * sampler.area();
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("mean is positive and finite").sample(rng) as usize;
    (0..count).map(|_| sampler.sample(rng)).collect()
}

/// One realisation of the transmitter process on the admissible region.
pub fn sample_ppp<R: Rng + ?Sized>(model: &InterferenceModel, rng: &mut R) -> Result<Vec<Point2D>, SimError> {
    let sampler = RegionSampler::new(model.region())?;
    Ok(sample_with(&sampler, model.lambda(), rng))
}

/// `Σ P h_x ‖x‖^{-α}` at the origin.
pub fn aggregate_interference<R: Rng + ?Sized>(
    points: &[Point2D],
    model: &InterferenceModel,
    tx_power: f64,
    rng: &mut R,
) -> Result<f64, SimError> {
    let fading = model.fading();
    let mut total = 0.0;
    for p in points {
        let d = p.norm();
        if d == 0.0 {
            return Err(SimError::Singularity);
        }
        let h = match fading.kind {
            FadingKind::Rayleigh => {
                let e: f64 = rng.sample(Exp1);
                e * fading.mean_power
            }
            FadingKind::None => fading.mean_power,
        };
        total += tx_power * h * d.powf(-model.alpha());
    }
    Ok(total)
}

/// Runs `n_trials` independent trials in parallel; output order is trial
/// order.
pub fn run_campaign(params: &CampaignParams) -> Result<CampaignResult, SimError> {
    params.validate()?;
    let sampler = RegionSampler::new(params.model.region())?;
    let seed = derive_seed(params.seed, "campaign");
    let trials: Vec<(u64, f64)> = (0..params.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let points = sample_with(&sampler, params.model.lambda(), &mut rng);
            let value = aggregate_interference(&points, &params.model, params.tx_power, &mut rng)?;
            Ok((points.len() as u64, value))
        })
        .collect::<Result<_, SimError>>()?;
    let (n_nodes, samples): (Vec<u64>, Vec<f64>) = trials.into_iter().unzip();
    let n_nodes_mean = n_nodes.iter().sum::<u64>() as f64 / n_nodes.len() as f64;
    Ok(CampaignResult {
        samples,
        n_nodes,
        n_nodes_mean,
        seed_used: params.seed,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// Kolmogorov–Smirnov distance `sup |F_n − F|`. `cdf` is evaluated once per
/// sample, in parallel.
pub fn ks_distance<F: Fn(f64) -> f64 + Sync>(samples: &[f64], cdf: F) -> Result<f64, SimError> {
    if samples.len() < 2 {
        return Err(SimError::Degenerate(format!("need at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(SimError::Degenerate("sample contains NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let f: Vec<f64> = sorted.par_iter().map(|&x| cdf(x)).collect();
    if let Some(bad) = f.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(SimError::Degenerate(format!(
            "reference CDF returned {} at {}",
            f[bad], sorted[bad]
        )));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // ties: the empirical CDF jumps once over the whole run
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        d = d.max(f[i] - i as f64 / n).max((j + 1) as f64 / n - f[i]);
        i = j + 1;
    }
    Ok(d)
}

/// `(mean, standard error)` of `e^{-s I}` over the samples.
pub fn empirical_laplace(samples: &[f64], s: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let vals: Vec<f64> = samples.iter().map(|&v| (-s * v).exp()).collect();
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Draws from the one-sided stable law `exp(-K s^η)`, `0 < η < 1`, with
/// the Chambers–Mallows–Stuck construction. For a totally skewed positive
/// law it reduces to Kanter's form
/// `X = K^{1/η} (A(U)/E)^{(1−η)/η}`, `U ~ U(0, π)`, `E ~ Exp(1)`.
pub fn stable_sample<R: Rng + ?Sized>(law: &StableLaw, n: usize, rng: &mut R) -> Result<Vec<f64>, SimError> {
    let eta = law.eta();
    if !(eta > 0.0 && eta < 1.0) {
        return Err(SimError::InvalidParams(format!("stable sampler needs 0 < eta < 1, got {eta}")));
    }
    let scale = law.k().powf(1.0 / eta);
    Ok((0..n).map(|_| scale * kanter_draw(eta, rng)).collect())
}

fn kanter_draw<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    let a = (eta * u).sin().powf(eta / (1.0 - eta)) * ((1.0 - eta) * u).sin()
        / u.sin().powf(1.0 / (1.0 - eta));
    (a / e).powf((1.0 - eta) / eta)
}

/// Stable draws with one stream per draw index, for parallel use.
pub fn stable_sample_seeded(law: &StableLaw, n: usize, seed: u64) -> Result<Vec<f64>, SimError> {
    let eta = law.eta();
    if !(eta > 0.0 && eta < 1.0) {
        return Err(SimError::InvalidParams(format!("stable sampler needs 0 < eta < 1, got {eta}")));
    }
    let scale = law.k().powf(1.0 / eta);
    let seed = derive_seed(seed, "stable");
    Ok((0..n)
        .into_par_iter()
        .map(|i| scale * kanter_draw(eta, &mut trial_rng(seed, i as u64)))
        .collect())
}
