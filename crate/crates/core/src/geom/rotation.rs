use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::{Error, Result};

/// Hamilton quaternion `w + xi + yj + zk` with unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    /// Builds a unit quaternion, renormalizing the input.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if ![w, x, y, z].iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("quaternion has non-finite component"));
        }
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n < 1e-12 {
            return Err(Error::invalid("quaternion has zero norm"));
        }
        Ok(Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn neg(&self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        quaternion_to_matrix(self)
    }
}

/// Converts a unit quaternion to its rotation matrix. `q` and `-q` give the same matrix.
pub fn quaternion_to_matrix(q: &UnitQuaternion) -> RotationMatrix {
    let UnitQuaternion { w, x, y, z } = *q;
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let (xy, xz, yz) = (x * y, x * z, y * z);
    let (wx, wy, wz) = (w * x, w * y, w * z);
    RotationMatrix(Matrix3::new(
        1.0 - 2.0 * (yy + zz),
        2.0 * (xy - wz),
        2.0 * (xz + wy),
        2.0 * (xy + wz),
        1.0 - 2.0 * (xx + zz),
        2.0 * (yz - wx),
        2.0 * (xz - wy),
        2.0 * (yz + wx),
        1.0 - 2.0 * (xx + yy),
    ))
}

/// Axis-times-angle chart of SO(3); the length is the rotation angle in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationVector(Vec3);

impl RotationVector {
    pub const ANGLE_SLACK: f64 = 1e-9;

    pub fn new(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("rotation vector has non-finite component"));
        }
        if v.norm() > PI + Self::ANGLE_SLACK {
            return Err(Error::invalid(format!(
                "rotation vector length {} exceeds pi",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }
}

/// Proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality and determinant within [`Self::TOLERANCE`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("rotation has non-finite entry"));
        }
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        if err > Self::TOLERANCE {
            return Err(Error::invalid(format!(
                "rotation not orthonormal (deviation {err:.3e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::invalid(format!("rotation determinant {det} != 1")));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Rodrigues rotation about `axis` by `angle` radians. The axis is renormalized.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Result<Self> {
        if !axis.iter().all(|c| c.is_finite()) || !angle.is_finite() {
            return Err(Error::invalid("axis-angle has non-finite component"));
        }
        let n = axis.norm();
        if n < 1e-12 {
            return Err(Error::invalid("rotation axis has zero length"));
        }
        Ok(Self::about_unit_axis(&(axis / n), angle))
    }

    /// Rodrigues formula for an axis already known to be unit length.
    pub(crate) fn about_unit_axis(e: &Vec3, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let k = e.cross_matrix();
        Self(Matrix3::identity() + k * s + k * k * (1.0 - c))
    }

    pub fn from_rotation_vector(v: &RotationVector) -> Self {
        let theta = v.angle();
        if theta < 1e-300 {
            return Self::identity();
        }
        Self::about_unit_axis(&(v.vector() / theta), theta)
    }

    pub fn to_rotation_vector(&self) -> RotationVector {
        let m = &self.0;
        let skew = Vec3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        );
        let s = 0.5 * skew.norm();
        let c = 0.5 * (m.trace() - 1.0);
        let theta = s.atan2(c);
        if theta < 1e-300 {
            return RotationVector(Vec3::zeros());
        }
        if c > 0.0 {
            // Well away from pi: the skew part is accurate.
            return RotationVector(skew * (theta / (2.0 * s)));
        }
        // Near pi: read the axis from the symmetric part (1 - cos) e e^T.
        let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * c;
        let j = (0..3)
            .max_by(|&a, &b2| b[(a, a)].total_cmp(&b[(b2, b2)]))
            .unwrap_or(0);
        let mut e: Vec3 = b.column(j).into();
        e /= e.norm();
        if PI - theta < 1e-9 {
            e = canonical_sign(e);
        } else if e.dot(&skew) < 0.0 {
            e = -e;
        }
        RotationVector(e * theta)
    }

    /// Shepperd's method; returns the representative with `w >= 0`.
    pub fn to_quaternion(&self) -> UnitQuaternion {
        let m = &self.0;
        let tr = m.trace();
        let (w, x, y, z);
        if tr > m[(0, 0)] && tr > m[(1, 1)] && tr > m[(2, 2)] {
            let s = (1.0 + tr).sqrt() * 2.0;
            w = 0.25 * s;
            x = (m[(2, 1)] - m[(1, 2)]) / s;
            y = (m[(0, 2)] - m[(2, 0)]) / s;
            z = (m[(1, 0)] - m[(0, 1)]) / s;
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(2, 1)] - m[(1, 2)]) / s;
            x = 0.25 * s;
            y = (m[(0, 1)] + m[(1, 0)]) / s;
            z = (m[(0, 2)] + m[(2, 0)]) / s;
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(0, 2)] - m[(2, 0)]) / s;
            x = (m[(0, 1)] + m[(1, 0)]) / s;
            y = 0.25 * s;
            z = (m[(1, 2)] + m[(2, 1)]) / s;
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            w = (m[(1, 0)] - m[(0, 1)]) / s;
            x = (m[(0, 2)] + m[(2, 0)]) / s;
            y = (m[(1, 2)] + m[(2, 1)]) / s;
            z = 0.25 * s;
        }
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let sign = if w < 0.0 { -1.0 } else { 1.0 };
        UnitQuaternion {
            w: sign * w / n,
            x: sign * x / n,
            y: sign * y / n,
            z: sign * z / n,
        }
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.0 * p
    }

    pub fn angle(&self) -> f64 {
        let m = &self.0;
        let s = 0.5
            * Vec3::new(
                m[(2, 1)] - m[(1, 2)],
                m[(0, 2)] - m[(2, 0)],
                m[(1, 0)] - m[(0, 1)],
            )
            .norm();
        let c = 0.5 * (m.trace() - 1.0);
        s.atan2(c)
    }

    /// Re-orthonormalizes after long products.
    pub fn renormalized(&self) -> Self {
        let q = self.to_quaternion();
        q.to_matrix()
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl Mul for &RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl TryFrom<[[f64; 3]; 3]> for RotationMatrix {
    type Error = Error;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<RotationMatrix> for [[f64; 3]; 3] {
    fn from(r: RotationMatrix) -> Self {
        r.rows()
    }
}

/// Angle of `r1^T r2` in `[0, pi]`.
pub fn geodesic_distance(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    (r1.transpose() * *r2).angle()
}

/// Of `v` and `-v`, the one whose first nonzero component is positive.
pub(crate) fn canonical_sign(v: Vec3) -> Vec3 {
    for c in v.iter() {
        if c.abs() > 1e-12 {
            return if *c > 0.0 { v } else { -v };
        }
    }
    v
}

/// Rigid motion `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(RotationMatrix::identity(), Vec3::zeros())
    }

    pub fn from_rotation(rotation: RotationMatrix) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(RotationMatrix::identity(), translation)
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation.apply(&other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -rt.apply(&self.translation),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn max_diff(a: &RotationMatrix, b: &RotationMatrix) -> f64 {
        (a.matrix() - b.matrix()).abs().max()
    }

    #[test]
    fn identity_quaternion() {
        let r = quaternion_to_matrix(&UnitQuaternion::identity());
        assert_eq!(r, RotationMatrix::identity());
    }

    #[test]
    fn quarter_turn_quaternion_matches_axis_angle() {
        let h = 0.5f64.sqrt();
        let r = quaternion_to_matrix(&UnitQuaternion::new(h, h, 0.0, 0.0).unwrap());
        let direct = RotationMatrix::from_axis_angle(&Vec3::x(), FRAC_PI_2).unwrap();
        assert!(max_diff(&r, &direct) < 1e-12);
        // basis vectors: x fixed, y -> z, z -> -y
        assert_abs_diff_eq!(r.apply(&Vec3::x()), Vec3::x(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.apply(&Vec3::y()), Vec3::z(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.apply(&Vec3::z()), -Vec3::y(), epsilon = 1e-12);
    }

    #[test]
    fn non_finite_quaternion_rejected() {
        assert!(UnitQuaternion::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(UnitQuaternion::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn axis_angle_examples() {
        let e = Vec3::new(0.3, -0.4, 0.5).normalize();
        assert!(max_diff(
            &RotationMatrix::from_axis_angle(&e, 0.0).unwrap(),
            &RotationMatrix::identity()
        ) < 1e-15);
        let half = RotationMatrix::from_axis_angle(&Vec3::z(), PI).unwrap();
        let expected = Matrix3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0));
        assert!((half.matrix() - expected).abs().max() < 1e-15);
        let quarter = RotationMatrix::from_axis_angle(&Vec3::z(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(quarter.apply(&Vec3::x()), Vec3::y(), epsilon = 1e-15);
        assert!(RotationMatrix::from_axis_angle(&Vec3::zeros(), 1.0).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let r = RotationMatrix::from_axis_angle(&Vec3::new(1.0, 2.0, 3.0), 0.7).unwrap();
        assert!(geodesic_distance(&r, &r) < 1e-12);
        let q = RotationMatrix::from_axis_angle(&Vec3::z(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(
            geodesic_distance(&RotationMatrix::identity(), &q),
            FRAC_PI_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn rotation_vector_examples() {
        assert_eq!(
            RotationMatrix::identity().to_rotation_vector().vector(),
            Vec3::zeros()
        );
        let r = RotationMatrix::from_axis_angle(&Vec3::x(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(
            r.to_rotation_vector().vector(),
            Vec3::new(FRAC_PI_2, 0.0, 0.0),
            epsilon = 1e-14
        );
        assert!(RotationVector::new(Vec3::new(3.2, 0.0, 0.0)).is_err());
    }

    #[test]
    fn half_turn_rotation_vector_is_canonical() {
        let axis = Vec3::new(-1.0, 2.0, -0.5).normalize();
        let r = RotationMatrix::from_axis_angle(&axis, PI).unwrap();
        let v = r.to_rotation_vector().vector();
        assert!(v.x > 0.0);
        assert_abs_diff_eq!(v.norm(), PI, epsilon = 1e-9);
        // Either antipode is accepted on input.
        for sign in [1.0, -1.0] {
            let back =
                RotationMatrix::from_rotation_vector(&RotationVector::new(axis * PI * sign).unwrap());
            assert!(geodesic_distance(&back, &r) < 1e-9);
        }
    }

    #[test]
    fn rigid_transform_algebra() {
        let t1 = RigidTransform::new(
            RotationMatrix::from_axis_angle(&Vec3::y(), 0.4).unwrap(),
            Vec3::new(1.0, 2.0, 3.0),
        );
        let p = Vec3::new(0.2, -0.1, 0.9);
        let back = t1.inverse().apply(&t1.apply(&p));
        assert_abs_diff_eq!(back, p, epsilon = 1e-12);
    }

    fn arb_rotation() -> impl Strategy<Value = RotationMatrix> {
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
        )
            .prop_filter("non-degenerate", |(w, x, y, z)| {
                w * w + x * x + y * y + z * z > 1e-3
            })
            .prop_map(|(w, x, y, z)| UnitQuaternion::new(w, x, y, z).unwrap().to_matrix())
    }

    proptest! {
        #[test]
        fn double_cover(w in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            prop_assume!(w * w + x * x + y * y + z * z > 1e-3);
            let q = UnitQuaternion::new(w, x, y, z).unwrap();
            prop_assert!(max_diff(&q.to_matrix(), &q.neg().to_matrix()) <= 1e-12);
        }

        #[test]
        fn matrix_invariants(r in arb_rotation()) {
            prop_assert!(RotationMatrix::from_matrix(*r.matrix()).is_ok());
        }

        #[test]
        fn rotation_vector_round_trip(r in arb_rotation()) {
            let v = r.to_rotation_vector();
            prop_assert!(v.angle() <= PI + 1e-9);
            let back = RotationMatrix::from_rotation_vector(&v);
            prop_assert!(geodesic_distance(&back, &r) < 1e-8);
        }

        #[test]
        fn quaternion_round_trip(r in arb_rotation()) {
            let back = r.to_quaternion().to_matrix();
            prop_assert!(geodesic_distance(&back, &r) < 1e-8);
        }

        #[test]
        fn geodesic_triangle_inequality(a in arb_rotation(), b in arb_rotation(), c in arb_rotation()) {
            let ab = geodesic_distance(&a, &b);
            let bc = geodesic_distance(&b, &c);
            let ac = geodesic_distance(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - geodesic_distance(&b, &a)).abs() < 1e-12);
            prop_assert!((0.0..=PI).contains(&ab));
        }
    }
}
