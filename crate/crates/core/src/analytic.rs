//! The stable-law model of aggregate interference.
//!
//! [`compute_k`] turns a network description into the stable constant `K`;
//! [`StableLaw`] then provides the transform, density, CDF, truncated mean
//! and the `∫ f ln f` uncertainty functional. Closed forms are used for
//! `η ∈ {1/3, 1/2, 2/3}` and a point mass for `η = 1`; any other index goes
//! through numerical Laplace inversion.
//!
//! The `*_paper_literal` functions evaluate the published expressions as
//! printed, typos included, so that reports can show how far they are from
//! the corrected forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{lune, GeometryError, RegionSpec};
use crate::ltinv::{stable_density, InversionConfig, InversionError};
use crate::quad::{integrate_log, QuadConfig, QuadError};
use crate::specfun::{
    airy_ai, erfc, exp_integral_e1, gamma, inverse_upper_gamma, kummer_u, ln_gamma,
    lower_incomplete_gamma, upper_incomplete_gamma, SpecialError,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalyticError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("admissible region is empty or degenerate (K = {0}); there is no interference law")]
    ZeroRegion(f64),
    #[error("eta = 1 (alpha = 2) gives a point mass at K = {k}; {what} is not defined")]
    PointMass { k: f64, what: &'static str },
    #[error("{0}")]
    Domain(String),
    #[error("the infinite-area transform has a pole at eta = 1")]
    Pole,
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    #[default]
    Rayleigh,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSpec {
    #[serde(default)]
    pub kind: FadingKind,
    /// Mean power gain; 1 for unit-mean Rayleigh.
    #[serde(default = "unit")]
    pub mean_power: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for FadingSpec {
    fn default() -> Self {
        Self {
            kind: FadingKind::Rayleigh,
            mean_power: 1.0,
        }
    }
}

impl FadingSpec {
    /// `E[h^η]`: `Γ(1+η)·P^η` for exponential power gain of mean `P`.
    pub fn eta_moment(&self, eta: f64) -> Result<f64, AnalyticError> {
        let scale = self.mean_power.powf(eta);
        Ok(match self.kind {
            FadingKind::Rayleigh => gamma(1.0 + eta)? * scale,
            FadingKind::None => scale,
        })
    }
}

/// Path loss, node density, region and fading of a secondary network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceModel {
    alpha: f64,
    eta: f64,
    lambda: f64,
    region: RegionSpec,
    fading: FadingSpec,
}

impl InterferenceModel {
    pub fn new(
        alpha: f64,
        lambda: f64,
        region: RegionSpec,
        fading: FadingSpec,
    ) -> Result<Self, AnalyticError> {
        if !(alpha >= 2.0 && alpha.is_finite()) {
            return Err(AnalyticError::InvalidModel(format!(
                "path-loss exponent alpha must be finite and >= 2, got {alpha}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AnalyticError::InvalidModel(format!("lambda must be > 0, got {lambda}")));
        }
        if !(fading.mean_power > 0.0 && fading.mean_power.is_finite()) {
            return Err(AnalyticError::InvalidModel(format!(
                "fading mean_power must be > 0, got {}",
                fading.mean_power
            )));
        }
        region.validate()?;
        region.check_truncation(alpha)?;
        Ok(Self {
            alpha,
            eta: 2.0 / alpha,
            lambda,
            region,
            fading,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn fading(&self) -> &FadingSpec {
        &self.fading
    }
}

/// One-sided stable law with Laplace transform `exp(-K s^η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    k: f64,
    eta: f64,
}

/// Which density representation a law uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    PointMass,
    Levy,
    Airy,
    Kummer,
    Inversion,
}

const FORM_TOL: f64 = 1e-12;

/// Left tail cut: the density is below `e^{-LEFT_TAIL_EXPONENT}` (relative)
/// to the left of [`StableLaw::left_cutoff`].
const LEFT_TAIL_EXPONENT: f64 = 120.0;

impl StableLaw {
    pub fn new(k: f64, eta: f64) -> Result<Self, AnalyticError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(AnalyticError::Domain(format!("stable constant K must be > 0, got {k}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(AnalyticError::Domain(format!("stable index eta must lie in (0, 1], got {eta}")));
        }
        Ok(Self { k, eta })
    }

    /// Builds a law without checking `K`. Only for fault injection: every
    /// downstream result is meaningless for `K ≤ 0`.
    #[doc(hidden)]
    pub fn new_unchecked(k: f64, eta: f64) -> Self {
        Self { k, eta }
    }

    pub fn from_alpha(k: f64, alpha: f64) -> Result<Self, AnalyticError> {
        Self::new(k, 2.0 / alpha)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        2.0 / self.eta
    }

    /// `K^{1/η}`: the law of `I / scale` has `K = 1`.
    pub fn scale(&self) -> f64 {
        self.k.abs().powf(1.0 / self.eta)
    }

    pub fn form(&self) -> DensityForm {
        let near = |v: f64| (self.eta - v).abs() < FORM_TOL;
        if near(1.0) {
            DensityForm::PointMass
        } else if near(0.5) {
            DensityForm::Levy
        } else if near(1.0 / 3.0) {
            DensityForm::Airy
        } else if near(2.0 / 3.0) {
            DensityForm::Kummer
        } else {
            DensityForm::Inversion
        }
    }

    pub fn laplace(&self, s: f64) -> Result<f64, AnalyticError> {
        if !(s >= 0.0) {
            return Err(AnalyticError::Domain(format!("Laplace argument must be >= 0, got {s}")));
        }
        Ok((-self.k * s.powf(self.eta)).exp())
    }

    pub fn pdf(&self, r: f64) -> Result<f64, AnalyticError> {
        if !(r > 0.0) {
            return Err(AnalyticError::Domain(format!("density argument must be > 0, got {r}")));
        }
        let k = self.k;
        Ok(match self.form() {
            DensityForm::PointMass => {
                return Err(AnalyticError::PointMass { k, what: "the density" })
            }
            DensityForm::Levy => {
                let e = -k * k / (4.0 * r);
                let ln_pre = -(2.0 * PI.sqrt()).ln() - 1.5 * r.ln();
                k * (ln_pre + e).exp()
            }
            DensityForm::Airy => {
                let y = k / (3.0 * r).cbrt();
                if y > 110.0 {
                    0.0
                } else {
                    k / (3f64.cbrt() * r.powf(4.0 / 3.0)) * airy_ai(y)
                }
            }
            DensityForm::Kummer => {
                let z = 4.0 * k.powi(3) / (27.0 * r * r);
                if z > 800.0 {
                    0.0
                } else {
                    let pre = 2f64.powf(4.0 / 3.0) / (3f64.powf(1.5) * PI.sqrt());
                    pre * k * k * r.powf(-7.0 / 3.0) * (-z).exp() * kummer_u(1.0 / 6.0, 4.0 / 3.0, z)?
                }
            }
            DensityForm::Inversion => stable_density(k, self.eta, r, &InversionConfig::default())?,
        })
    }

    /// Density on a grid; each point is independent.
    pub fn pdf_grid(&self, grid: &[f64]) -> Result<Vec<f64>, AnalyticError> {
        grid.iter().map(|&r| self.pdf(r)).collect()
    }

    /// Large-`r` power-law amplitude: `f(r) ≈ A r^{-1-η}` with
    /// `A = K η / Γ(1 − η)`.
    pub fn tail_amplitude(&self) -> Result<f64, AnalyticError> {
        if self.form() == DensityForm::PointMass {
            return Err(AnalyticError::PointMass { k: self.k, what: "the tail amplitude" });
        }
        Ok(self.k * self.eta / gamma(1.0 - self.eta)?)
    }

    /// Below this point the density is negligible (`< e^{-120}` relative).
    pub fn left_cutoff(&self) -> f64 {
        let eta = self.eta;
        let c = (1.0 - eta) * eta.powf(eta / (1.0 - eta));
        (c / LEFT_TAIL_EXPONENT).powf((1.0 - eta) / eta) * self.scale()
    }

    /// `r` at which `K r^{-η} = w`.
    fn radius_at(&self, w: f64) -> f64 {
        (self.k.abs() / w).powf(1.0 / self.eta)
    }

    /// Convergent large-`r` expansion of the CCDF in `w = K r^{-η}`.
    fn ccdf_series(&self, w: f64) -> Result<f64, AnalyticError> {
        let eta = self.eta;
        let mut sum = 0.0;
        for k in 1..=600u32 {
            let kf = k as f64;
            let mag = (ln_gamma(kf * eta)? - ln_gamma(kf + 1.0)? + kf * w.abs().ln()).exp();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 } * w.signum().powi(k as i32);
            sum += sign * mag * (kf * PI * eta).sin();
            if mag < 1e-18 * sum.abs().max(1e-300) {
                return Ok(sum / PI);
            }
        }
        Err(SpecialError::NoConvergence("stable CCDF series").into())
    }

    fn quad_cfg() -> QuadConfig {
        QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }

    fn integrate_density<F: Fn(f64, f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        weight: F,
    ) -> Result<f64, AnalyticError> {
        if b <= a {
            return Ok(0.0);
        }
        let f = |r: f64| match self.pdf(r) {
            Ok(p) => weight(r, p),
            Err(_) => f64::NAN,
        };
        match integrate_log(f, a, b, &Self::quad_cfg()) {
            Ok(res) => Ok(res.value),
            // surface the density error instead of the generic NaN report
            Err(QuadError::NonFinite { at }) => {
                let r = at.exp();
                self.pdf(r)?;
                Err(QuadError::NonFinite { at: r }.into())
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn cdf(&self, r: f64) -> Result<f64, AnalyticError> {
        if !(r >= 0.0) {
            return Err(AnalyticError::Domain(format!("CDF argument must be >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        match self.form() {
            DensityForm::PointMass => Ok(if r >= self.k { 1.0 } else { 0.0 }),
            DensityForm::Levy => Ok(erfc(self.k / (2.0 * r.sqrt()))),
            _ => {
                let w = self.k * r.powf(-self.eta);
                if w.abs() <= 0.5 {
                    Ok(1.0 - self.ccdf_series(w)?)
                } else {
                    self.integrate_density(self.left_cutoff(), r, |_, p| p)
                }
            }
        }
    }

    pub fn ccdf(&self, r: f64) -> Result<f64, AnalyticError> {
        if self.form() != DensityForm::PointMass && r > 0.0 {
            let w = self.k * r.powf(-self.eta);
            if w.abs() <= 0.5 {
                return self.ccdf_series(w);
            }
        }
        Ok(1.0 - self.cdf(r)?)
    }

    /// `∫₀^∞ f`, by quadrature up to `K r^{-η} = 1/2` and the convergent
    /// tail series beyond. Should be one; a check on the density.
    pub fn normalization(&self) -> Result<f64, AnalyticError> {
        if self.form() == DensityForm::PointMass {
            return Ok(1.0);
        }
        let r_tail = self.radius_at(0.5);
        let body = self.integrate_density(self.left_cutoff(), r_tail, |_, p| p)?;
        Ok(body + self.ccdf_series(0.5 * self.k.signum())?)
    }

    /// `∫₀^{r_max} r f(r) dr`.
    pub fn truncated_mean(&self, r_max: f64) -> Result<f64, AnalyticError> {
        if !(r_max > 0.0) {
            return Err(AnalyticError::Domain(format!("r_max must be > 0, got {r_max}")));
        }
        if self.form() == DensityForm::PointMass {
            return Ok(if self.k <= r_max { self.k } else { 0.0 });
        }
        self.integrate_density(self.left_cutoff(), r_max, |r, p| r * p)
    }

    /// `δ = ∫ f ln f`, the negative differential entropy.
    pub fn uncertainty(&self) -> Result<f64, AnalyticError> {
        if self.form() == DensityForm::PointMass {
            return Err(AnalyticError::PointMass { k: self.k, what: "the uncertainty integral (it diverges)" });
        }
        // beyond r_t the leading power law is accurate to O(1e-6) relative
        let r_t = self.radius_at(1e-6);
        let body = self.integrate_density(self.left_cutoff(), r_t, |_, p| {
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        })?;
        let a = self.tail_amplitude()?;
        let eta = self.eta;
        let tail = a * r_t.powf(-eta) / eta * (a.ln() - (1.0 + eta) * (r_t.ln() + 1.0 / eta));
        Ok(body + tail)
    }

    /// `K` at which [`uncertainty`](Self::uncertainty) equals `target`.
    /// Under `I → aI`, `δ` drops by `ln a`, so `δ(K) = δ(1) − ln K / η`.
    pub fn k_for_uncertainty(eta: f64, target: f64) -> Result<f64, AnalyticError> {
        let unit = StableLaw::new(1.0, eta)?;
        Ok((eta * (unit.uncertainty()? - target)).exp())
    }

    /// Smallest `r` with `cdf(r) ≥ p`, by bisection in `ln r`.
    pub fn quantile(&self, p: f64) -> Result<f64, AnalyticError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(AnalyticError::Domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        match self.form() {
            DensityForm::PointMass => return Ok(self.k),
            DensityForm::Levy => {
                // erfc(K / 2√r) = p
                let (mut lo, mut hi) = (0.0f64, 30.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if erfc(mid) > p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let y = 0.5 * (lo + hi);
                return Ok((self.k / (2.0 * y)).powi(2));
            }
            _ => {}
        }
        let (mut lo, mut hi) = (self.left_cutoff().ln(), self.radius_at(1e-12).ln());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid.exp())? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

/// `K = λ θ₁ E[h^η] [γ(1−η, r_max) − γ(1−η, r_p)]`.
///
/// Transmitters occupy an angular fraction `θ₁/π` of each annulus, which
/// with the full-circle `π λ` gives `λ θ₁`. As `r_max → ∞` with `θ₁ = π`,
/// `r_p = 0` this tends to the infinite-plane constant.
pub fn compute_k(model: &InterferenceModel) -> Result<StableLaw, AnalyticError> {
    let geo = lune(model.region())?;
    let RegionSpec { r_max, r_p, .. } = *model.region();
    let eta = model.eta();
    let radial = if r_max <= r_p {
        0.0
    } else if (eta - 1.0).abs() < FORM_TOL {
        if r_p == 0.0 {
            return Err(AnalyticError::Domain(
                "alpha = 2 needs r_p > 0: the radial integral diverges at the origin".into(),
            ));
        }
        exp_integral_e1(r_p)? - exp_integral_e1(r_max)?
    } else {
        lower_incomplete_gamma(1.0 - eta, r_max)? - lower_incomplete_gamma(1.0 - eta, r_p)?
    };
    let k = model.lambda() * geo.theta1 * model.fading().eta_moment(eta)? * radial;
    if !(k > 0.0) {
        return Err(AnalyticError::ZeroRegion(k));
    }
    StableLaw::new(k, eta)
}

/// The published constant `π λ Γ(1+η) 2θ₁ [Γ(1−η, r_max) − Γ(1−η, r_p)]`
/// with upper incomplete gammas, exactly as printed. Negative whenever
/// `r_max > r_p`, and `2π` times [`compute_k`] in magnitude.
pub fn compute_k_paper_literal(model: &InterferenceModel) -> Result<f64, AnalyticError> {
    let geo = lune(model.region())?;
    let RegionSpec { r_max, r_p, .. } = *model.region();
    let eta = model.eta();
    let a = 1.0 - eta;
    let upper = |x: f64| -> Result<f64, AnalyticError> {
        if x == 0.0 {
            if a > 0.0 {
                Ok(gamma(a)?)
            } else {
                Ok(f64::INFINITY)
            }
        } else {
            Ok(upper_incomplete_gamma(a, x)?)
        }
    };
    Ok(PI * model.lambda() * gamma(1.0 + eta)? * 2.0 * geo.theta1 * (upper(r_max)? - upper(r_p)?))
}

/// The product `λ θ₁` that yields stable constant `k` for a given `alpha`,
/// `r_max` and `r_p` (Rayleigh, unit mean power).
pub fn lambda_theta_for_k(alpha: f64, r_max: f64, r_p: f64, k: f64) -> Result<f64, AnalyticError> {
    let eta = 2.0 / alpha;
    let radial = lower_incomplete_gamma(1.0 - eta, r_max)? - lower_incomplete_gamma(1.0 - eta, r_p)?;
    Ok(k / (gamma(1.0 + eta)? * radial))
}

/// Laplace transform of the aggregate interference on the whole plane,
/// `exp(−π λ E[h^η] Γ(1−η) s^η)`; equals `exp(−π λ s^η πη / sin πη)` for
/// unit Rayleigh fading.
pub fn laplace_transform_infinite(model: &InterferenceModel, s: f64) -> Result<f64, AnalyticError> {
    let eta = model.eta();
    if (eta - 1.0).abs() < FORM_TOL {
        return Err(AnalyticError::Pole);
    }
    if !(s >= 0.0) {
        return Err(AnalyticError::Domain(format!("Laplace argument must be >= 0, got {s}")));
    }
    let c = PI * model.lambda() * model.fading().eta_moment(eta)? * gamma(1.0 - eta)?;
    Ok((-c * s.powf(eta)).exp())
}

/// Leading-order large-argument approximation
/// `Ai(x) ≈ exp(−2x^{3/2}/3) / (2√π x^{1/4})`.
pub fn airy_asymptotic(x: f64) -> f64 {
    (-2.0 * x.powf(1.5) / 3.0).exp() / (2.0 * PI.sqrt() * x.powf(0.25))
}

/// Largest `x` in `(0.05, 20)` where [`airy_asymptotic`] is off by more than
/// `rel_err`. The error falls monotonically with `x`.
pub fn airy_asymptotic_crossover(rel_err: f64) -> f64 {
    let err = |x: f64| (airy_asymptotic(x) / airy_ai(x) - 1.0).abs();
    let (mut lo, mut hi) = (0.05f64, 20.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if err(mid) > rel_err {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A published closed form evaluated as printed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PaperValue {
    Value { value: f64 },
    /// The expression is a distribution, not a number.
    NotEvaluable { note: String },
    /// The inverse-gamma expression has no solution; `reciprocal_reading`
    /// reads `Γ^{-1}(a, x)` as `1/Γ(a, x)` instead.
    NoRoot { note: String, reciprocal_reading: f64 },
}

impl PaperValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            PaperValue::Value { value } => Some(*value),
            _ => None,
        }
    }
}

/// Published density branches, evaluated as printed.
pub fn pdf_paper_literal(alpha: f64, k: f64, r: f64) -> Result<PaperValue, AnalyticError> {
    let is = |a: f64| (alpha - a).abs() < 1e-12;
    let value = if is(2.0) {
        return Ok(PaperValue::NotEvaluable {
            note: "printed as delta(K), a distribution".into(),
        });
    } else if is(3.0) {
        let pre = 2f64.powf(4.0 / 3.0) / (3f64.powf(1.5) * PI.sqrt() * k * k * r.powf(7.0 / 3.0));
        let arg = 4.0 / 27.0 * k.powf(0.75) * r.powi(-2);
        pre * (-4.0 / (27.0 * k.powi(3) * r * r)).exp() * kummer_u(1.0 / 6.0, 4.0 / 3.0, arg)?
    } else if is(4.0) {
        1.0 / (2.0 * PI.sqrt() * k * r.powf(1.5)) * (-1.0 / (4.0 * k * k * r)).exp()
    } else if is(6.0) {
        3.0 / (3.0 * k * r.powf(4.0 / 3.0)) * airy_ai(3.0 * k * r.cbrt())
    } else {
        return Err(AnalyticError::Domain(format!(
            "no published density branch for alpha = {alpha}"
        )));
    };
    Ok(PaperValue::Value { value })
}

/// Published truncated-mean expressions, evaluated as printed.
pub fn truncated_mean_paper(alpha: f64, k: f64, r_max: f64) -> Result<PaperValue, AnalyticError> {
    let is = |a: f64| (alpha - a).abs() < 1e-12;
    if is(2.0) {
        return Ok(PaperValue::NotEvaluable {
            note: format!("printed as delta(K) * r_max^2 / 2 with r_max^2/2 = {}", r_max * r_max / 2.0),
        });
    }
    let value = if is(4.0) {
        erfc(1.0 / (2.0 * k * r_max.sqrt()))
    } else if is(6.0) {
        let g1 = upper_incomplete_gamma(2.0 / 3.0, 5.1962 * k.powf(1.5) * r_max.sqrt())?;
        let g2 = upper_incomplete_gamma(2.0 / 3.0, 1.5197 * k.powf(0.75) * r_max.sqrt())?;
        1.6633 * r_max.powf(1.0 / 9.0) / k * (1.3541 - g1) - 0.5618 * r_max.powf(0.25) / k.powf(2.25) * g2
    } else if is(3.0) {
        let x = 0.8536 * r_max * r_max;
        let y = upper_incomplete_gamma(1.0 / 6.0, x)?;
        return match inverse_upper_gamma(1.0 / 6.0, x) {
            Ok(v) => Ok(PaperValue::Value { value: 0.56 * v }),
            Err(SpecialError::NoRoot(_)) => Ok(PaperValue::NoRoot {
                note: format!(
                    "Gamma(1/6, x) = {x} has no solution (Gamma(1/6) = {})",
                    gamma(1.0 / 6.0)?
                ),
                reciprocal_reading: 0.56 / y,
            }),
            Err(e) => Err(e.into()),
        };
    } else {
        return Err(AnalyticError::Domain(format!(
            "no published mean expression for alpha = {alpha}"
        )));
    };
    Ok(PaperValue::Value { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::EULER_GAMMA;
    use proptest::prelude::*;

    const ETAS: [f64; 3] = [1.0 / 3.0, 0.5, 2.0 / 3.0];

    fn levy_entropy(k: f64) -> f64 {
        let c = k * k / 2.0;
        (1.0 + 3.0 * EULER_GAMMA + (16.0 * PI * c * c).ln()) / 2.0
    }

    fn model(alpha: f64, lambda: f64, r_max: f64, r_p: f64, r_dec: f64) -> InterferenceModel {
        let region = RegionSpec::new(r_max, r_p, r_dec).unwrap();
        InterferenceModel::new(alpha, lambda, region, FadingSpec::default()).unwrap()
    }

    #[test]
    fn levy_reference_value() {
        let law = StableLaw::new(2.0, 0.5).unwrap();
        let v = law.pdf(1.0).unwrap();
        assert!((v - (-1.0f64).exp() / PI.sqrt()).abs() < 1e-15);
        assert!((law.cdf(1.0).unwrap() - erfc(1.0)).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_inversion() {
        let cfg = InversionConfig::default();
        for &eta in &ETAS {
            for &k in &[0.25, 1.0] {
                let law = StableLaw::new(k, eta).unwrap();
                for i in 0..20 {
                    let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0);
                    let exact = law.pdf(r).unwrap();
                    if exact < 1e-12 {
                        continue;
                    }
                    let inv = stable_density(k, eta, r, &cfg).unwrap();
                    assert!((exact - inv).abs() < 1e-6 * exact, "eta={eta} k={k} r={r}: {exact} vs {inv}");
                }
            }
        }
    }

    #[test]
    fn normalization_and_cdf_limit() {
        for &eta in &ETAS {
            let law = StableLaw::new(0.5598, eta).unwrap();
            let n = law.normalization().unwrap();
            assert!((n - 1.0).abs() < 1e-6, "eta={eta}: {n}");
            // heavy tail: 1 − F(r) ~ K r^{-η}, so go far enough out
            assert!((law.cdf(law.radius_at(1e-8)).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cdf_is_continuous_at_the_series_switch() {
        for &eta in &[1.0 / 3.0, 2.0 / 3.0] {
            let law = StableLaw::new(1.0, eta).unwrap();
            let r = law.radius_at(0.5);
            let below = law.cdf(r * (1.0 - 1e-9)).unwrap();
            let above = law.cdf(r * (1.0 + 1e-9)).unwrap();
            assert!((below - above).abs() < 1e-8, "eta={eta}: {below} vs {above}");
        }
    }

    #[test]
    fn point_mass_branch() {
        let law = StableLaw::new(1.5, 1.0).unwrap();
        assert!(matches!(law.pdf(1.0), Err(AnalyticError::PointMass { .. })));
        assert_eq!(law.cdf(1.49).unwrap(), 0.0);
        assert_eq!(law.cdf(1.5).unwrap(), 1.0);
        assert_eq!(law.truncated_mean(2.0).unwrap(), 1.5);
        assert_eq!(law.truncated_mean(1.0).unwrap(), 0.0);
        assert!(law.uncertainty().is_err());
        assert!((law.laplace(2.0).unwrap() - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn levy_uncertainty_matches_entropy() {
        for &k in &[0.5, 1.0, 2.0] {
            let law = StableLaw::new(k, 0.5).unwrap();
            let h = levy_entropy(k);
            let d = law.uncertainty().unwrap();
            assert!((-d - h).abs() < 1e-6 * h.abs(), "k={k}: {d} vs {h}");
        }
    }

    #[test]
    fn uncertainty_root_matches_bisection() {
        let target = 2.62;
        let k = StableLaw::k_for_uncertainty(0.5, target).unwrap();
        let d = StableLaw::new(k, 0.5).unwrap().uncertainty().unwrap();
        assert!((d - target).abs() < 1e-6);
        let (mut lo, mut hi) = (1e-4f64.ln(), 1f64.ln());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            // δ falls as K grows
            if StableLaw::new(mid.exp(), 0.5).unwrap().uncertainty().unwrap() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi)).exp() / k - 1.0 < 1e-6);
    }

    #[test]
    fn truncated_mean_levy_matches_closed_integral() {
        // ∫₀^R r f(r) dr for Lévy = (K/√π)·[√R e^{-u} − √π·(K/2)·erfc(√u)], u = K²/(4R)
        for &(k, r_max) in &[(0.25, 1.0), (1.0, 10.0), (0.5598, 3.4)] {
            let u: f64 = k * k / (4.0 * r_max);
            let exact = k / PI.sqrt() * (r_max.sqrt() * (-u).exp() - PI.sqrt() * k / 2.0 * erfc(u.sqrt()));
            let v = StableLaw::new(k, 0.5).unwrap().truncated_mean(r_max).unwrap();
            assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
        }
    }

    #[test]
    fn truncated_mean_grows_without_bound() {
        for &eta in &ETAS {
            let law = StableLaw::new(1.0, eta).unwrap();
            let m: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| law.truncated_mean(r).unwrap()).collect();
            assert!(m[0] < m[1] && m[1] < m[2], "eta={eta}: {m:?}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &eta in &ETAS {
            let law = StableLaw::new(0.7, eta).unwrap();
            for &p in &[0.1, 0.5, 0.9] {
                let q = law.quantile(p).unwrap();
                assert!((law.cdf(q).unwrap() - p).abs() < 1e-9, "eta={eta} p={p}");
            }
        }
    }

    #[test]
    fn compute_k_reference_and_infinite_limit() {
        let m = model(4.0, 0.1, 10.0, 0.5, 0.0);
        let k = compute_k(&m).unwrap().k();
        let radial = lower_incomplete_gamma(0.5, 10.0).unwrap() - lower_incomplete_gamma(0.5, 0.5).unwrap();
        assert!((k - 0.1 * PI * gamma(1.5).unwrap() * radial).abs() < 1e-14);

        let far = model(4.0, 0.01, 50.0, 0.0, 0.0);
        let law = compute_k(&far).unwrap();
        let finite = law.laplace(1.0).unwrap();
        let infinite = laplace_transform_infinite(&far, 1.0).unwrap();
        assert!((finite / infinite - 1.0).abs() < 0.01);
        let exponent = -infinite.ln();
        assert!((exponent - PI * PI * 0.01 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn compute_k_literal_is_negative_and_2pi_larger() {
        let m = model(4.0, 0.1, 10.0, 0.5, 0.0);
        let k = compute_k(&m).unwrap().k();
        let lit = compute_k_paper_literal(&m).unwrap();
        assert!(lit < 0.0);
        assert!((lit.abs() / k - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn compute_k_alpha_two_and_errors() {
        let m = model(2.0, 0.1, 5.0, 0.5, 0.0);
        let k = compute_k(&m).unwrap();
        assert_eq!(k.form(), DensityForm::PointMass);
        let e = exp_integral_e1(0.5).unwrap() - exp_integral_e1(5.0).unwrap();
        assert!((k.k() - 0.1 * PI * e).abs() < 1e-14);
        assert!(compute_k(&model(2.0, 0.1, 5.0, 0.0, 0.0)).is_err());
        // r_p = r_max, concentric: nothing left
        assert!(matches!(compute_k(&model(4.0, 0.1, 2.0, 2.0, 0.0)), Err(AnalyticError::ZeroRegion(_))));
        assert!(laplace_transform_infinite(&m, 1.0).is_err());
    }

    #[test]
    fn model_validation() {
        let region = RegionSpec::full_disk(3.4).unwrap().with_epsilon(0.01).unwrap();
        assert!(InterferenceModel::new(3.0, 0.1, region, FadingSpec::default()).is_err());
        let region = RegionSpec::full_disk(1.0).unwrap();
        assert!(InterferenceModel::new(1.5, 0.1, region, FadingSpec::default()).is_err());
        assert!(InterferenceModel::new(4.0, 0.0, region, FadingSpec::default()).is_err());
        assert!(StableLaw::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn airy_asymptotic_accuracy() {
        assert!((airy_asymptotic(10.0) / airy_ai(10.0) - 1.0).abs() < 0.01);
        let x = airy_asymptotic_crossover(0.05);
        assert!(x > 0.5 && x < 3.0, "{x}");
    }

    #[test]
    fn paper_literal_levy_swaps_k() {
        // the printed branch at K is the canonical density at 1/K
        let lit = pdf_paper_literal(4.0, 2.0, 0.7).unwrap().value().unwrap();
        let canon = StableLaw::new(0.5, 0.5).unwrap().pdf(0.7).unwrap();
        assert!((lit - canon).abs() < 1e-14);
        assert!(matches!(truncated_mean_paper(3.0, 0.5598, 3.4).unwrap(), PaperValue::NoRoot { .. }));
        assert!(matches!(truncated_mean_paper(2.0, 1.0, 3.4).unwrap(), PaperValue::NotEvaluable { .. }));
    }

    #[test]
    fn generic_index_goes_through_inversion() {
        let law = StableLaw::new(1.0, 0.4).unwrap();
        assert_eq!(law.form(), DensityForm::Inversion);
        let n = law.normalization().unwrap();
        assert!((n - 1.0).abs() < 1e-6, "{n}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaling_law(eta_idx in 0usize..3, k in 0.1f64..3.0, a in 0.2f64..5.0, r in 0.05f64..50.0) {
            let eta = ETAS[eta_idx];
            let base = StableLaw::new(k, eta).unwrap();
            let scaled = StableLaw::new(k * a.powf(eta), eta).unwrap();
            let lhs = scaled.pdf(r).unwrap();
            let rhs = base.pdf(r / a).unwrap() / a;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300) || (lhs - rhs).abs() < 1e-290);
        }

        #[test]
        fn cdf_nondecreasing(eta_idx in 0usize..3, k in 0.1f64..3.0, r in 0.01f64..100.0, f in 1.0f64..3.0) {
            let law = StableLaw::new(k, ETAS[eta_idx]).unwrap();
            prop_assert!(law.cdf(r * f).unwrap() >= law.cdf(r).unwrap() - 1e-12);
        }

        #[test]
        fn k_monotone(lambda in 0.01f64..1.0, r_p in 0.0f64..2.0, r_dec in 0.5f64..4.0) {
            let base = compute_k(&model(4.0, lambda, 5.0, r_p, r_dec)).unwrap().k();
            let denser = compute_k(&model(4.0, lambda * 1.1, 5.0, r_p, r_dec)).unwrap().k();
            let wider = compute_k(&model(4.0, lambda, 5.0, r_p + 0.1, r_dec)).unwrap().k();
            prop_assert!(denser > base);
            prop_assert!(wider < base);
        }
    }
}
