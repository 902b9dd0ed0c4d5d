use std::path::Path;

use aggint::analytic::{compute_k, FadingKind, FadingSpec, InterferenceModel, StableLaw};
use aggint::detector::DetectorConfig;
use aggint::geometry::RegionSpec;
use aggint::ltinv::{InversionConfig, InversionMethod};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "AGGINT_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// Everything a run can be configured with. Loaded from TOML, then
/// overridden field by field from the command line.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Thread count; not echoed into outputs since results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    pub model: ModelSection,
    pub grid: GridSection,
    pub campaign: CampaignSection,
    pub detector: DetectorConfig,
    pub inversion: InversionSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub alpha: Option<f64>,
    pub k: Option<f64>,
    pub lambda: Option<f64>,
    pub region: RegionSection,
    pub fading: FadingSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionSection {
    pub r_max: Option<f64>,
    pub r_p: Option<f64>,
    pub r_dec: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub values: Option<Vec<f64>>,
    pub spec: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignSection {
    pub n_trials: usize,
    pub tx_power: f64,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            tx_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSection {
    pub method: InversionMethod,
    pub node_count: Option<usize>,
    pub precision_target: f64,
    pub cross_check: bool,
}

impl Default for InversionSection {
    fn default() -> Self {
        let base = InversionConfig::default();
        Self {
            method: base.method,
            node_count: None,
            precision_target: base.precision_target,
            cross_check: base.cross_check,
        }
    }
}

impl InversionSection {
    pub fn resolve(&self) -> Result<InversionConfig, CliError> {
        let cfg = InversionConfig {
            method: self.method,
            node_count: self.node_count.unwrap_or(self.method.default_nodes()),
            precision_target: self.precision_target,
            cross_check: self.cross_check,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads a TOML config; unknown keys are reported with their full path.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let de = toml::Deserializer::parse(text).map_err(|e| e.to_string())?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        if path == "." || path.is_empty() {
            format!("config error: {msg}")
        } else {
            format!("config error at `{path}`: {msg}")
        }
    })
}

/// Flag, then config file, then `AGGINT_SEED`, then 1.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// How the stable law was obtained.
#[derive(Debug, Clone, Copy)]
pub enum ModelSource {
    Direct,
    Network(InterferenceModel),
}

impl ModelSection {
    pub fn has_network(&self) -> bool {
        self.lambda.is_some() || self.region.r_max.is_some()
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.alpha
            .ok_or_else(|| CliError::Config("model.alpha (--alpha) is required".into()))
    }

    pub fn network(&self) -> Result<InterferenceModel, CliError> {
        let alpha = self.alpha()?;
        let lambda = self
            .lambda
            .ok_or_else(|| CliError::Config("model.lambda (--lambda) is required".into()))?;
        let r_max = self
            .region
            .r_max
            .ok_or_else(|| CliError::Config("model.region.r_max (--rmax) is required".into()))?;
        let mut region = RegionSpec::new(
            r_max,
            self.region.r_p.unwrap_or(0.0),
            self.region.r_dec.unwrap_or(0.0),
        )?;
        if let Some(eps) = self.region.epsilon {
            region = region.with_epsilon(eps)?;
        }
        Ok(InterferenceModel::new(alpha, lambda, region, self.fading)?)
    }

    /// Exactly one of `k` or the network parameters must be present.
    pub fn law(&self) -> Result<(StableLaw, ModelSource), CliError> {
        match (self.k, self.has_network()) {
            (Some(_), true) => Err(CliError::Config(
                "give either K (--k) or the network parameters (--lambda, --rmax, ...), not both".into(),
            )),
            (None, false) => Err(CliError::Config(
                "no model: give K (--k) or the network parameters (--lambda, --rmax, ...)".into(),
            )),
            (Some(k), false) => Ok((StableLaw::from_alpha(k, self.alpha()?)?, ModelSource::Direct)),
            (None, true) => {
                let model = self.network()?;
                Ok((compute_k(&model)?, ModelSource::Network(model)))
            }
        }
    }
}

pub fn parse_fading(s: &str) -> Result<FadingKind, String> {
    match s {
        "rayleigh" => Ok(FadingKind::Rayleigh),
        "none" => Ok(FadingKind::None),
        _ => Err(format!("unknown fading {s:?}; expected rayleigh or none")),
    }
}

/// `log:min:max:n` or `lin:min:max:n`.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad grid spec {spec:?}; expected log:min:max:n or lin:min:max:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [kind, lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    let at = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match *kind {
        "lin" => Ok((0..n).map(|i| lo + (hi - lo) * at(i)).collect()),
        "log" => {
            if !(lo > 0.0 && hi > 0.0) {
                return Err(CliError::Config(format!("log grid needs positive limits, got {spec:?}")));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| (a + (b - a) * at(i)).exp()).collect())
        }
        _ => Err(bad()),
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("bad range {spec:?}; expected start:stop:step");
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts.as_slice() else {
        return Err(bad());
    };
    if !(*step > 0.0) || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

impl GridSection {
    pub fn resolve(&self, default: &str) -> Result<Vec<f64>, CliError> {
        let grid = match (&self.values, &self.spec) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("grid: give either values (--r) or spec (--grid), not both".into()))
            }
            (Some(v), None) => v.clone(),
            (None, Some(s)) => parse_grid_spec(s)?,
            (None, None) => parse_grid_spec(default)?,
        };
        if grid.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_reports_path() {
        let err = parse("[model]\nalpha = 4\n[model.region]\nrmax = 3\n").unwrap_err();
        assert!(err.contains("model.region"), "{err}");
        assert!(err.contains("rmax"), "{err}");
        let err = parse("[detector]\nsmoothing = 4\n").unwrap_err();
        assert!(err.contains("detector"), "{err}");
    }

    #[test]
    fn full_document_parses() {
        let cfg = parse(
            r#"
seed = 7
workers = 2
[model]
alpha = 4.0
lambda = 0.05
[model.region]
r_max = 10.0
epsilon = 0.01
[model.fading]
kind = "rayleigh"
[grid]
spec = "log:0.1:10:5"
[campaign]
n_trials = 100
[detector]
inr_db = -inf
trials = 10
[inversion]
method = "euler"
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert!(cfg.detector.inr_db.is_infinite());
        assert_eq!(cfg.inversion.resolve().unwrap().node_count, 40);
        let (law, _) = cfg.model.law().unwrap();
        assert!(law.k() > 0.0);
        assert_eq!(cfg.grid.resolve("lin:0:1:2").unwrap().len(), 5);
    }

    #[test]
    fn grids() {
        let g = parse_grid_spec("log:0.01:100:5").unwrap();
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!((g[4] - 100.0).abs() < 1e-10);
        assert_eq!(parse_range("-20:0:2").unwrap().len(), 11);
        assert!(parse_grid_spec("log:0:1:3").is_err());
        assert!(parse_range("0:-1:1").is_err());
    }

    #[test]
    fn model_must_be_unique() {
        let mut m = ModelSection {
            alpha: Some(4.0),
            k: Some(1.0),
            lambda: Some(0.1),
            ..Default::default()
        };
        m.region.r_max = Some(5.0);
        assert!(matches!(m.law(), Err(CliError::Config(_))));
        m.k = None;
        assert!(m.law().is_ok());
        m.lambda = None;
        m.region.r_max = None;
        assert!(matches!(m.law(), Err(CliError::Config(_))));
    }
}
