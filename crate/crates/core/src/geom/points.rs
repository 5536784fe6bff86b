use serde::{Deserialize, Serialize};

use super::{RigidTransform, RotationMatrix, Vec3};
use crate::{Error, Result};

/// Non-empty ordered point set with cached centroid and radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vec3>,
    centroid: Vec3,
    radius: f64,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("point set contains a non-finite coordinate"));
        }
        let centroid = points.iter().sum::<Vec3>() / points.len() as f64;
        let radius = points
            .iter()
            .map(|p| (p - centroid).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            points,
            centroid,
            radius,
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    /// Largest distance of any point from the centroid.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointSet {
        PointSet::new(self.points.iter().map(|p| t.apply(p)).collect())
            .expect("rigid image of a valid set is valid")
    }

    pub fn rotated(&self, r: &RotationMatrix) -> PointSet {
        self.transformed(&RigidTransform::from_rotation(*r))
    }

    /// Translates so the centroid sits at the origin.
    pub fn centered(&self) -> PointSet {
        self.transformed(&RigidTransform::from_translation(-self.centroid))
    }
}

/// A point set translated to its mean and scaled into `[-1, 1]^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Mean of the original points.
    pub center: Vec3,
    /// Multiplier applied after centering.
    pub scale: f64,
    /// All input points coincided; `scale` was fixed to 1.
    pub degenerate: bool,
}

impl Normalization {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.center) * self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p / self.scale + self.center
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPointSet {
    pub points: PointSet,
    pub normalization: Normalization,
}

impl NormalizedPointSet {
    pub fn denormalized(&self) -> Vec<Vec3> {
        self.points
            .points()
            .iter()
            .map(|p| self.normalization.invert(p))
            .collect()
    }
}

/// Centers at the mean and scales by `1 / max |coordinate|`.
pub fn normalize_point_set(p: &PointSet) -> NormalizedPointSet {
    let center = p.centroid();
    let max_abs = p
        .points()
        .iter()
        .flat_map(|q| (q - center).iter().map(|c| c.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let degenerate = max_abs <= f64::MIN_POSITIVE;
    let scale = if degenerate { 1.0 } else { 1.0 / max_abs };
    let normalization = Normalization {
        center,
        scale,
        degenerate,
    };
    let points = p.points().iter().map(|q| normalization.apply(q)).collect();
    NormalizedPointSet {
        points: PointSet::new(points).expect("normalized copy of a valid set"),
        normalization,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_rejected() {
        assert!(PointSet::new(vec![]).is_err());
        assert!(PointSet::new(vec![Vec3::new(f64::INFINITY, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn segment_normalizes() {
        let p = PointSet::new(vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)]).unwrap();
        let n = normalize_point_set(&p);
        assert_eq!(n.points.points(), &[Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        assert_eq!(n.normalization.center, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(n.normalization.scale, 1.0);
        assert!(!n.normalization.degenerate);
    }

    #[test]
    fn cube_corners_unchanged() {
        let mut pts = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    pts.push(Vec3::new(sx, sy, sz));
                }
            }
        }
        let p = PointSet::new(pts.clone()).unwrap();
        let n = normalize_point_set(&p);
        assert_eq!(n.normalization.scale, 1.0);
        assert_eq!(n.points.points(), &pts[..]);
        assert!((p.radius() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_set_flagged() {
        let p = PointSet::new(vec![Vec3::new(1.0, 2.0, 3.0); 4]).unwrap();
        let n = normalize_point_set(&p);
        assert!(n.normalization.degenerate);
        assert_eq!(n.normalization.scale, 1.0);
        assert!(n.points.points().iter().all(|q| q.norm() == 0.0));
    }

    proptest! {
        #[test]
        fn normalize_round_trip(raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 1..60)) {
            let pts: Vec<Vec3> = raw.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect();
            let p = PointSet::new(pts.clone()).unwrap();
            let n = normalize_point_set(&p);
            let max = n.points.points().iter().flat_map(|q| q.iter().map(|c| c.abs()).collect::<Vec<_>>()).fold(0.0, f64::max);
            prop_assert!(max <= 1.0 + 1e-9);
            if !n.normalization.degenerate {
                prop_assert!((max - 1.0).abs() < 1e-9);
            }
            prop_assert!(n.points.centroid().norm() < 1e-9);
            for (a, b) in n.denormalized().iter().zip(&pts) {
                prop_assert!((a - b).abs().max() < 1e-9);
            }
        }
    }
}
