//! Rotational symmetry detection and symmetry-aware pose distances for rigid objects.
//!
//! The crate is organised bottom-up:
//!
//! * [`geom`]: rotations, rigid transforms, point sets, kd-tree and Hausdorff distance.
//! * [`shape`]: model loading (OBJ / PLY / CSV) and synthetic toy shapes.
//! * [`symmetry`]: symmetry axis-angle detection and five-way category classification.
//! * [`gp`]: grouped primitives built from a detected symmetry set.
//! * [`metrics`]: AGPD / MGPD and the ADD / ADD-S baselines, plus AUC aggregation.
//! * [`landscape`]: dense SO(3) sampling, local-minimum search and 1-D slices.
//! * [`fit`]: numerical pose descent under a chosen distance.
//! * [`cli`]: the `symgp` command-line front end.

pub mod cli;
pub mod error;
pub mod fit;
pub mod geom;
pub mod gp;
pub mod landscape;
pub mod metrics;
pub mod report;
pub mod shape;
pub mod symmetry;

pub use error::{Error, Result};
pub use fit::{batch_fit, fit_pose, FitConfig, FitProblem, FitResult, InitMode, TrialResult};
pub use geom::{
    build_nn_index, geodesic_distance, hausdorff_distance, normalize_point_set, NnIndex,
    NormalizedPointSet, PointSet, RigidTransform, RotationMatrix, RotationVector, UnitQuaternion,
    Vec3,
};
pub use gp::{build_gp, build_gp_from_axes, transform_gp, GroupedPrimitives};
pub use landscape::{build_landscape, descend_to_minima, slice_1d, Landscape, MinimaReport, Minimum};
pub use metrics::{
    add, add_s, agpd, amgpd, auc, lipschitz_bound, mgpd, AucCurve, MetricKind, MetricValue, PoseDistance,
};
pub use report::RunHeader;
pub use symmetry::{detect, AxisAngle, Category, DetectorConfig, SymmetryGroup, SymmetrySet};
