//! Interference region geometry.
//!
//! The victim receiver sits at the origin. Secondary transmitters are
//! confined to the network disk `C₀` of radius `r_max` around it, minus the
//! protection disk `C₁` of radius `r_p` centred at `(r_dec, 0)`. What is
//! left is the lune whose admissible half-angle `theta1` enters the
//! stable-law constant `K`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid region: {0}")]
    Invalid(String),
    #[error(
        "r_max = {r_max} violates the truncation rule 1 - r_max^(2-alpha) > 1 - epsilon \
         for alpha = {alpha}, epsilon = {epsilon} (needs r_max > {required})"
    )]
    Truncation {
        r_max: f64,
        alpha: f64,
        epsilon: f64,
        required: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Network disk, protection disk and the optional truncation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Radius of the finite network disk around the victim.
    pub r_max: f64,
    /// Protection radius around the primary transmitter.
    pub r_p: f64,
    /// Distance from the victim to the primary transmitter.
    pub r_dec: f64,
    /// Mean-interference matching factor; when set, `r_max` must satisfy
    /// the truncation rule for the model's path-loss exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl RegionSpec {
    pub fn new(r_max: f64, r_p: f64, r_dec: f64) -> Result<Self, GeometryError> {
        let region = Self {
            r_max,
            r_p,
            r_dec,
            epsilon: None,
        };
        region.validate()?;
        Ok(region)
    }

    /// Whole disk, no protection zone.
    pub fn full_disk(r_max: f64) -> Result<Self, GeometryError> {
        Self::new(r_max, 0.0, 0.0)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, GeometryError> {
        self.epsilon = Some(epsilon);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = [self.r_max, self.r_p, self.r_dec]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(GeometryError::Invalid(format!(
                "radii must be finite (r_max = {}, r_p = {}, r_dec = {})",
                self.r_max, self.r_p, self.r_dec
            )));
        }
        if !(self.r_max > 0.0) {
            return Err(GeometryError::Invalid(format!("r_max must be > 0, got {}", self.r_max)));
        }
        if self.r_p < 0.0 {
            return Err(GeometryError::Invalid(format!("r_p must be >= 0, got {}", self.r_p)));
        }
        if self.r_dec < 0.0 {
            return Err(GeometryError::Invalid(format!("r_dec must be >= 0, got {}", self.r_dec)));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(GeometryError::Invalid(format!("epsilon must lie in (0, 1), got {eps}")));
            }
        }
        Ok(())
    }

    /// Smallest radius satisfying `1 - r^(2-alpha) > 1 - epsilon`, i.e.
    /// `epsilon^(-1/(alpha-2))`.
    pub fn truncation_radius(alpha: f64, epsilon: f64) -> f64 {
        if alpha <= 2.0 {
            f64::INFINITY
        } else {
            epsilon.powf(-1.0 / (alpha - 2.0))
        }
    }

    /// Enforces the truncation rule when `epsilon` is set. The rule is
    /// `1 - r_max^(2-alpha) >= 1 - epsilon`; equality (the rule's own
    /// boundary radius) is accepted.
    pub fn check_truncation(&self, alpha: f64) -> Result<(), GeometryError> {
        let Some(epsilon) = self.epsilon else {
            return Ok(());
        };
        let required = Self::truncation_radius(alpha, epsilon);
        let lhs = 1.0 - self.r_max.powf(2.0 - alpha);
        // relative slack so that r_max = truncation_radius() itself passes
        if alpha <= 2.0 || lhs < (1.0 - epsilon) - 1e-12 {
            return Err(GeometryError::Truncation {
                r_max: self.r_max,
                alpha,
                epsilon,
                required,
            });
        }
        Ok(())
    }

    fn protection_center(&self) -> Point2D {
        Point2D::new(self.r_dec, 0.0)
    }
}

/// How the protection disk cuts the network disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LuneKind {
    /// No overlap: the whole network disk is admissible.
    FullDisk,
    /// Protection disk strictly inside the network disk.
    Annulus,
    /// The boundary circles cross.
    Lune,
    /// The network disk lies inside the protection disk.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuneGeometry {
    pub kind: LuneKind,
    /// Admissible half-angle: transmitters at full radius occupy
    /// `|angle| ∈ [π − theta1, π]`. π for an uncut disk, 0 when empty.
    pub theta1: f64,
    /// Half-angle of the excluded cap at the intersection points,
    /// `arccos(chord_x / r_max)`; equals `π − theta1`.
    pub cap_half_angle: f64,
    pub area: f64,
    /// u-coordinate of the circle intersection points (crossing case only).
    pub chord_x: Option<f64>,
}

/// Area of the intersection of two disks of radii `r0`, `r1` whose centres
/// are `d` apart.
pub fn lens_area(r0: f64, r1: f64, d: f64) -> f64 {
    if d >= r0 + r1 {
        return 0.0;
    }
    if d <= (r0 - r1).abs() {
        let r = r0.min(r1);
        return PI * r * r;
    }
    let a0 = ((d * d + r0 * r0 - r1 * r1) / (2.0 * d * r0)).clamp(-1.0, 1.0).acos();
    let a1 = ((d * d + r1 * r1 - r0 * r0) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let k = (-d + r0 + r1) * (d + r0 - r1) * (d - r0 + r1) * (d + r0 + r1);
    r0 * r0 * a0 + r1 * r1 * a1 - 0.5 * k.max(0.0).sqrt()
}

pub fn lune(region: &RegionSpec) -> Result<LuneGeometry, GeometryError> {
    region.validate()?;
    let RegionSpec { r_max, r_p, r_dec, .. } = *region;
    let disk = PI * r_max * r_max;
    let uncut = |kind, area| LuneGeometry {
        kind,
        theta1: PI,
        cap_half_angle: 0.0,
        area,
        chord_x: None,
    };
    if r_p == 0.0 || r_dec >= r_max + r_p {
        return Ok(uncut(LuneKind::FullDisk, disk));
    }
    if r_dec + r_max <= r_p {
        return Ok(LuneGeometry {
            kind: LuneKind::Empty,
            theta1: 0.0,
            cap_half_angle: PI,
            area: 0.0,
            chord_x: None,
        });
    }
    if r_dec + r_p <= r_max {
        // includes the concentric case r_dec = 0
        return Ok(uncut(LuneKind::Annulus, disk - PI * r_p * r_p));
    }
    let chord_x = (r_max * r_max + r_dec * r_dec - r_p * r_p) / (2.0 * r_dec);
    let cap = (chord_x / r_max).clamp(-1.0, 1.0).acos();
    Ok(LuneGeometry {
        kind: LuneKind::Lune,
        theta1: PI - cap,
        cap_half_angle: cap,
        area: (disk - lens_area(r_max, r_p, r_dec)).max(0.0),
        chord_x: Some(chord_x),
    })
}

/// Membership in the admissible region: inside `C₀`, outside `C₁`.
pub fn contains(point: &Point2D, region: &RegionSpec) -> bool {
    point.norm() <= region.r_max && point.distance(&region.protection_center()) >= region.r_p
}

/// Admissible angular half-width at radius `rho`: points `(rho, φ)` with
/// `|φ| ≥ π − half_width` lie outside the protection disk.
pub fn admissible_half_width(rho: f64, region: &RegionSpec) -> f64 {
    let all_or_nothing = |admissible: bool| if admissible { PI } else { 0.0 };
    if region.r_p == 0.0 {
        return PI;
    }
    if region.r_dec == 0.0 {
        return all_or_nothing(rho >= region.r_p);
    }
    if rho == 0.0 {
        return all_or_nothing(region.r_dec >= region.r_p);
    }
    let c = (rho * rho + region.r_dec * region.r_dec - region.r_p * region.r_p)
        / (2.0 * rho * region.r_dec);
    // admissible where cos φ ≤ c
    PI - c.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_protection_is_full_disk() {
        let g = lune(&RegionSpec::new(3.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(g.kind, LuneKind::FullDisk);
        assert_eq!(g.theta1, PI);
        assert!((g.area - 9.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn swallowed_network_is_empty() {
        let g = lune(&RegionSpec::new(1.0, 5.0, 2.0).unwrap()).unwrap();
        assert_eq!(g.kind, LuneKind::Empty);
        assert_eq!(g.area, 0.0);
        assert_eq!(g.theta1, 0.0);
    }

    #[test]
    fn concentric_is_annulus() {
        let g = lune(&RegionSpec::new(2.0, 0.5, 0.0).unwrap()).unwrap();
        assert_eq!(g.kind, LuneKind::Annulus);
        assert_eq!(g.theta1, PI);
        assert!((g.area - PI * (4.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn disjoint_external_is_full_disk() {
        let g = lune(&RegionSpec::new(1.0, 1.0, 3.0).unwrap()).unwrap();
        assert_eq!(g.kind, LuneKind::FullDisk);
        assert_eq!(g.theta1, PI);
    }

    #[test]
    fn crossing_circles_reference_case() {
        let g = lune(&RegionSpec::new(2.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(g.kind, LuneKind::Lune);
        assert!((g.chord_x.unwrap() - 1.75).abs() < 1e-15);
        assert!((g.cap_half_angle - 0.875f64.acos()).abs() < 1e-15);
        assert!((g.theta1 + g.cap_half_angle - PI).abs() < 1e-15);
        // lune + lens = disk
        let lens = lens_area(2.0, 1.0, 2.0);
        assert!((g.area + lens - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn crossing_area_matches_rejection_sampling() {
        let region = RegionSpec::new(2.0, 1.0, 2.0).unwrap();
        let g = lune(&region).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let p = Point2D::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if contains(&p, &region) {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let p = g.area / 16.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p_hat - p).abs() < 3.0 * sigma, "{p_hat} vs {p}");
    }

    #[test]
    fn contains_reference_points() {
        let region = RegionSpec::new(5.0, 1.0, 2.0).unwrap();
        assert!(contains(&Point2D::new(0.0, 0.0), &region));
        assert!(!contains(&Point2D::new(2.0, 0.0), &region));
        assert!(!contains(&Point2D::new(6.0, 0.0), &region));
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(RegionSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(RegionSpec::new(1.0, -1.0, 1.0).is_err());
        assert!(RegionSpec::new(1.0, 1.0, f64::NAN).is_err());
        assert!(RegionSpec::full_disk(1.0).unwrap().with_epsilon(1.5).is_err());
    }

    #[test]
    fn truncation_rule() {
        let r = RegionSpec::truncation_radius(4.0, 0.01);
        assert!((r - 10.0).abs() < 1e-12);
        let ok = RegionSpec::full_disk(r).unwrap().with_epsilon(0.01).unwrap();
        assert!(ok.check_truncation(4.0).is_ok());
        let short = RegionSpec::full_disk(3.4).unwrap().with_epsilon(0.01).unwrap();
        assert!(matches!(short.check_truncation(3.0), Err(GeometryError::Truncation { .. })));
        // alpha = 2 can never satisfy the rule
        assert!(ok.check_truncation(2.0).is_err());
        // no epsilon, no check
        assert!(RegionSpec::full_disk(1.0).unwrap().check_truncation(2.0).is_ok());
    }

    #[test]
    fn half_width_matches_membership() {
        let region = RegionSpec::new(3.0, 1.5, 2.0).unwrap();
        for &rho in &[0.6, 1.0, 2.5, 3.0] {
            let w = admissible_half_width(rho, &region);
            let inside = Point2D::from_polar(rho, PI - w + 1e-9);
            let outside = Point2D::from_polar(rho, PI - w - 1e-6);
            if w > 0.0 && w < PI {
                assert!(contains(&inside, &region));
                assert!(!contains(&outside, &region));
            }
        }
    }

    proptest! {
        #[test]
        fn theta1_nonincreasing_in_protection_radius(
            r_max in 0.5f64..10.0, r_dec in 0.0f64..15.0, a in 0.0f64..20.0, b in 0.0f64..20.0,
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let g_lo = lune(&RegionSpec::new(r_max, lo, r_dec).unwrap()).unwrap();
            let g_hi = lune(&RegionSpec::new(r_max, hi, r_dec).unwrap()).unwrap();
            prop_assert!(g_hi.theta1 <= g_lo.theta1 + 1e-12);
            prop_assert!(g_hi.area <= g_lo.area + 1e-9);
        }

        #[test]
        fn lune_invariants(r_max in 0.1f64..10.0, r_p in 0.0f64..10.0, r_dec in 0.0f64..10.0) {
            let g = lune(&RegionSpec::new(r_max, r_p, r_dec).unwrap()).unwrap();
            prop_assert!((0.0..=PI).contains(&g.theta1));
            prop_assert!(g.area <= PI * r_max * r_max * (1.0 + 1e-12));
            prop_assert!(g.area >= 0.0);
            if g.kind == LuneKind::Lune {
                let lens = lens_area(r_max, r_p, r_dec);
                prop_assert!((g.area + lens - PI * r_max * r_max).abs() < 1e-9 * r_max * r_max);
            }
        }
    }
}
