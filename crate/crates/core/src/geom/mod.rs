//! Rotation algebra, point sets and Hausdorff distance.

mod hausdorff;
pub mod kdtree;
mod points;
mod rotation;

pub use hausdorff::{
    build_nn_index, directed_hausdorff, hausdorff_distance, median_spacing, rotation_residual,
    NnIndex,
};
pub use points::{normalize_point_set, Normalization, NormalizedPointSet, PointSet};
pub use rotation::{
    geodesic_distance, quaternion_to_matrix, RigidTransform, RotationMatrix, RotationVector,
    UnitQuaternion,
};
pub(crate) use rotation::canonical_sign;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Some unit vector perpendicular to `e` (deterministic).
pub fn perpendicular(e: &Vec3) -> Vec3 {
    let a = e.abs();
    let helper = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    e.cross(&helper).normalize()
}

/// Angle between the lines spanned by two unit vectors, in `[0, pi/2]`.
pub fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let c = a.dot(b).abs();
    let s = a.cross(b).norm();
    s.atan2(c)
}

/// Angle between two unit vectors, in `[0, pi]`.
pub fn vector_angle(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
