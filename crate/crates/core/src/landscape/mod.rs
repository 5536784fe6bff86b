//! Pose-distance landscapes over SO(3): dense sampling, local-minimum search by
//! neighbor descent, 1-D slices and export for plotting.
//!
//! The ground truth is always the identity; sample `i` is scored by the distance
//! between the identity pose and the rotation-only pose `R_i`.

mod descend;
mod export;
mod graph;
mod sampling;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use descend::{descend_to_minima, Minimum, MinimaReport, MANIFOLD_TERMINALS};
pub use export::{export_landscape, ExportFormat, ExportMeta};
pub use graph::{build_neighbor_graph, NeighborGraph};
pub use sampling::sample_so3;

use crate::geom::{RigidTransform, RotationMatrix, Vec3};
use crate::metrics::PoseDistance;
use crate::{Error, Result};

/// Sample count for full validation runs.
pub const DEFAULT_SAMPLES: usize = 50_000;
/// Neighbors per sample before symmetrization. Fewer leave graph-local minima at
/// flat saddles (rotations by nearly pi) that continuous descent walks off.
pub const DEFAULT_NEIGHBORS: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSample {
    pub rotation: RotationMatrix,
    /// Axis times angle of `rotation`.
    pub v: Vec3,
    pub d: f64,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub samples: Vec<LandscapeSample>,
    /// Largest nearest-neighbor geodesic gap of the sample (radians).
    pub max_gap: f64,
}

impl Landscape {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Scores every rotation against the identity.
pub fn evaluate_landscape(
    distance: &PoseDistance,
    rotations: &[RotationMatrix],
    graph: &NeighborGraph,
) -> Result<Landscape> {
    if graph.len() != rotations.len() {
        return Err(Error::invalid("neighbor graph does not match the rotation sample"));
    }
    let id = RigidTransform::identity();
    let samples = rotations
        .par_iter()
        .enumerate()
        .map(|(i, r)| LandscapeSample {
            rotation: *r,
            v: r.to_rotation_vector().vector(),
            d: distance.eval(&id, &RigidTransform::from_rotation(*r)),
            neighbors: graph.neighbors(i).to_vec(),
        })
        .collect();
    Ok(Landscape {
        samples,
        max_gap: graph.max_gap(),
    })
}

/// Samples, graph and scores in one call.
pub fn build_landscape(distance: &PoseDistance, n: usize, k: usize, seed: u64) -> Result<Landscape> {
    let rotations = sample_so3(n, seed)?;
    let graph = build_neighbor_graph(&rotations, k)?;
    evaluate_landscape(distance, &rotations, &graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub angle_deg: f64,
    pub d: f64,
}

/// Distance along the one-parameter family of rotations about `axis`: `steps`
/// evenly spaced angles `360 k / steps` degrees, starting at 0.
pub fn slice_1d(distance: &PoseDistance, axis: &Vec3, steps: usize) -> Result<Vec<SlicePoint>> {
    if steps < 36 {
        return Err(Error::invalid("a slice needs at least 36 steps"));
    }
    if !((axis.norm() - 1.0).abs() < 1e-9) {
        return Err(Error::invalid("slice axis must be a unit vector"));
    }
    let id = RigidTransform::identity();
    Ok((0..steps)
        .into_par_iter()
        .map(|k| {
            let angle_deg = 360.0 * k as f64 / steps as f64;
            let r = RotationMatrix::about_unit_axis(axis, angle_deg.to_radians());
            SlicePoint {
                angle_deg,
                d: distance.eval(&id, &RigidTransform::from_rotation(r)),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::build_gp_from_axes;
    use crate::metrics::{lipschitz_bound, MetricKind};
    use crate::symmetry::AxisAngle;

    #[test]
    fn identity_scores_zero_and_sphere_is_flat() {
        let gp = build_gp_from_axes(&[AxisAngle::new(Vec3::z(), 3).unwrap()], 1.0).unwrap();
        let d = PoseDistance::grouped(gp, MetricKind::Amgpd).unwrap();
        let l = build_landscape(&d, 300, 12, 0).unwrap();
        assert_eq!(l.samples[0].d, 0.0);
        assert!(l.samples.iter().all(|s| s.d >= 0.0));

        let full = [
            AxisAngle::new(Vec3::x(), 7).unwrap().with_continuous(true),
            AxisAngle::new(Vec3::y(), 7).unwrap().with_continuous(true),
        ];
        let sphere = PoseDistance::grouped(build_gp_from_axes(&full, 1.0).unwrap(), MetricKind::Amgpd).unwrap();
        let l = build_landscape(&sphere, 300, 12, 0).unwrap();
        assert!(l.samples.iter().all(|s| s.d == 0.0));
    }

    #[test]
    fn pyramid_slice_zeros_and_continuity() {
        let gp = build_gp_from_axes(&[AxisAngle::new(Vec3::z(), 4).unwrap()], 1.0).unwrap();
        let lip = lipschitz_bound(&gp);
        let d = PoseDistance::grouped(gp, MetricKind::Mgpd).unwrap();
        let s = slice_1d(&d, &Vec3::z(), 360).unwrap();
        assert_eq!(s.len(), 360);
        for k in [0, 90, 180, 270] {
            assert!(s[k].d < 1e-6, "{k}: {}", s[k].d);
            assert!(s[k + 45].d > 0.05);
        }
        let step = 1f64.to_radians();
        for w in s.windows(2) {
            assert!((w[1].d - w[0].d).abs() < lip * step);
        }
        assert!(slice_1d(&d, &Vec3::z(), 10).is_err());
        assert!(slice_1d(&d, &Vec3::new(0.0, 0.0, 2.0), 36).is_err());
    }
}
