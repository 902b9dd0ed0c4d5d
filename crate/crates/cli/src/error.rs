use aggint::analytic::AnalyticError;
use aggint::detector::DetectorError;
use aggint::geometry::GeometryError;
use aggint::ltinv::InversionError;
use aggint::mcsim::SimError;
use aggint::quad::QuadError;
use aggint::specfun::SpecialError;
use thiserror::Error;

/// Exit codes: 0 ok, 1 I/O failure, 2 configuration or geometry error,
/// 3 validation failure, 4 numerical non-convergence.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical method did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

fn special(e: &SpecialError) -> bool {
    matches!(e, SpecialError::NoConvergence(_))
}

fn quad(e: &QuadError) -> bool {
    matches!(e, QuadError::NotConverged { .. } | QuadError::NonFinite { .. })
}

fn inversion(e: &InversionError) -> bool {
    match e {
        InversionError::Config(_) | InversionError::Domain(_) => false,
        InversionError::AtIndex { source, .. } => inversion(source),
        _ => true,
    }
}

fn analytic_is_numerical(e: &AnalyticError) -> bool {
    match e {
        AnalyticError::Special(s) => special(s),
        AnalyticError::Quadrature(q) => quad(q),
        AnalyticError::Inversion(i) => inversion(i),
        _ => false,
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        if analytic_is_numerical(&e) {
            CliError::NonConvergence(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<InversionError> for CliError {
    fn from(e: InversionError) -> Self {
        if inversion(&e) {
            CliError::NonConvergence(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DetectorError> for CliError {
    fn from(e: DetectorError) -> Self {
        match e {
            DetectorError::Analytic(a) => a.into(),
            DetectorError::RankDeficient { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
