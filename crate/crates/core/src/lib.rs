//! Aggregate interference statistics for finite-area cognitive radio
//! networks.
//!
//! Secondary transmitters form a Poisson point process on the region left
//! between a finite network disk and a primary protection disk. Under
//! Rayleigh fading the aggregate interference at the victim receiver is
//! modelled by a one-sided stable law with Laplace transform
//! `exp(-K s^η)`, `η = 2/α`. This crate computes that law, checks it
//! against numerical Laplace inversion and Monte Carlo, and drives an
//! eigenvalue-based spectrum detector with it.

// `!(x > 0.0)` guards are written that way so NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature and series tables keep their published digits
#![allow(clippy::excessive_precision)]

pub mod analytic;
pub mod detector;
pub mod geometry;
pub mod ltinv;
pub mod mcsim;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use analytic::{compute_k, AnalyticError, FadingKind, FadingSpec, InterferenceModel, StableLaw};
pub use detector::{detection_curve, DetectionCurve, DetectorConfig, DetectorError};
pub use geometry::{GeometryError, Point2D, RegionSpec};
pub use ltinv::{invert, stable_density, InversionConfig, InversionError, InversionMethod};
pub use mcsim::{run_campaign, CampaignParams, CampaignResult, SimError};
