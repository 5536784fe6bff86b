//! Synthetic toy shapes, one per symmetry category.
//!
//! Shapes with a finite symmetry group are sampled on a fundamental patch and
//! replicated by the nominal group, so their sample sets are exactly invariant.
//! Shapes with a continuous axis are sampled on rings about that axis with a
//! seeded phase per ring.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::io::merge_duplicates;
use crate::geom::{PointSet, RotationMatrix, UnitQuaternion, Vec3};
use crate::symmetry::Category;
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Cube {
        half_edge: f64,
    },
    Pyramid {
        sides: u32,
        base_radius: f64,
        height: f64,
    },
    Cone {
        radius: f64,
        height: f64,
    },
    Cylinder {
        radius: f64,
        height: f64,
    },
    Sphere {
        radius: f64,
    },
    /// Two parallel arms along x, offset against each other along their length and
    /// joined by a short web; a single 2-fold axis along z.
    Clamp {
        length: f64,
        arm_gap: f64,
        arm_width: f64,
        thickness: f64,
        offset: f64,
    },
    /// Three orthogonal arms of different lengths: no rotational symmetry.
    Frame {
        arms: [f64; 3],
        thickness: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub samples: usize,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self {
            kind,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn cube() -> Self {
        Self::new(ShapeKind::Cube { half_edge: 1.0 })
    }

    pub fn pyramid(sides: u32) -> Self {
        Self::new(ShapeKind::Pyramid {
            sides,
            base_radius: 1.0,
            height: 0.6,
        })
    }

    pub fn cone() -> Self {
        Self::new(ShapeKind::Cone {
            radius: 1.0,
            height: 1.5,
        })
    }

    pub fn cylinder() -> Self {
        Self::new(ShapeKind::Cylinder {
            radius: 0.6,
            height: 2.0,
        })
    }

    pub fn sphere() -> Self {
        Self::new(ShapeKind::Sphere { radius: 1.0 })
    }

    pub fn clamp() -> Self {
        Self::new(ShapeKind::Clamp {
            length: 2.0,
            arm_gap: 0.36,
            arm_width: 0.1,
            thickness: 0.1,
            offset: 0.35,
        })
    }

    pub fn frame() -> Self {
        Self::new(ShapeKind::Frame {
            arms: [1.0, 0.7, 0.45],
            thickness: 0.1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 4 {
            return Err(Error::invalid("sample count must be at least 4"));
        }
        let sizes: Vec<f64> = match &self.kind {
            ShapeKind::Cube { half_edge } => vec![*half_edge],
            ShapeKind::Pyramid {
                sides,
                base_radius,
                height,
            } => {
                if *sides < 3 {
                    return Err(Error::invalid("pyramid needs at least 3 sides"));
                }
                vec![*base_radius, *height]
            }
            ShapeKind::Cone { radius, height } | ShapeKind::Cylinder { radius, height } => {
                vec![*radius, *height]
            }
            ShapeKind::Sphere { radius } => vec![*radius],
            ShapeKind::Clamp {
                length,
                arm_gap,
                arm_width,
                thickness,
                offset,
            } => {
                if *offset >= *length || *arm_width >= *arm_gap {
                    return Err(Error::invalid("clamp offset/width inconsistent with size"));
                }
                vec![*length, *arm_gap, *arm_width, *thickness, *offset]
            }
            ShapeKind::Frame { arms, thickness } => {
                let mut v = arms.to_vec();
                v.push(*thickness);
                v
            }
        };
        if sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("shape sizes must be positive"));
        }
        Ok(())
    }

    /// The symmetry this shape is built to have, in its own frame.
    pub fn nominal_symmetry(&self) -> NominalSymmetry {
        let z = Vec3::z();
        match &self.kind {
            ShapeKind::Cube { .. } => {
                let s2 = 0.5f64.sqrt();
                let s3 = (1.0f64 / 3.0).sqrt();
                let mut finite = vec![(Vec3::x(), 4), (Vec3::y(), 4), (z, 4)];
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    finite.push((Vec3::new(a * s3, b * s3, s3), 3));
                }
                for v in [
                    Vec3::new(1.0, 1.0, 0.0),
                    Vec3::new(1.0, -1.0, 0.0),
                    Vec3::new(1.0, 0.0, 1.0),
                    Vec3::new(1.0, 0.0, -1.0),
                    Vec3::new(0.0, 1.0, 1.0),
                    Vec3::new(0.0, 1.0, -1.0),
                ] {
                    finite.push((v * s2, 2));
                }
                NominalSymmetry {
                    category: Category::Cat1,
                    finite,
                    continuous: vec![],
                    perpendicular_twofold: false,
                }
            }
            ShapeKind::Pyramid { sides, .. } => NominalSymmetry {
                category: Category::Cat2,
                finite: vec![(z, *sides)],
                continuous: vec![],
                perpendicular_twofold: false,
            },
            ShapeKind::Clamp { .. } => NominalSymmetry {
                category: Category::Cat2,
                finite: vec![(z, 2)],
                continuous: vec![],
                perpendicular_twofold: false,
            },
            ShapeKind::Cone { .. } => NominalSymmetry {
                category: Category::Cat3,
                finite: vec![],
                continuous: vec![z],
                perpendicular_twofold: false,
            },
            ShapeKind::Cylinder { .. } => NominalSymmetry {
                category: Category::Cat4,
                finite: vec![],
                continuous: vec![z],
                perpendicular_twofold: true,
            },
            ShapeKind::Sphere { .. } => NominalSymmetry {
                category: Category::Cat5,
                finite: vec![],
                continuous: vec![],
                perpendicular_twofold: false,
            },
            ShapeKind::Frame { .. } => NominalSymmetry {
                category: Category::Asymmetric,
                finite: vec![],
                continuous: vec![],
                perpendicular_twofold: false,
            },
        }
    }

    /// For the clamp: the half-turn about the long axis that nearly maps the shape
    /// onto itself but is not a symmetry.
    pub fn spurious_flip(&self) -> Option<RotationMatrix> {
        match self.kind {
            ShapeKind::Clamp { .. } => Some(RotationMatrix::about_unit_axis(&Vec3::x(), PI)),
            _ => None,
        }
    }
}

/// Nominal symmetry of a generated shape.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalSymmetry {
    pub category: Category,
    /// Geometric finite axes (one direction per line) with their orders.
    pub finite: Vec<(Vec3, u32)>,
    pub continuous: Vec<Vec3>,
    /// Every axis perpendicular to the (single) continuous axis is a 2-fold axis.
    pub perpendicular_twofold: bool,
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ShapeKind::Cube { .. } => write!(f, "cube"),
            ShapeKind::Pyramid { sides, .. } => write!(f, "pyramid:{sides}"),
            ShapeKind::Cone { .. } => write!(f, "cone"),
            ShapeKind::Cylinder { .. } => write!(f, "cylinder"),
            ShapeKind::Sphere { .. } => write!(f, "sphere"),
            ShapeKind::Clamp { .. } => write!(f, "clamp"),
            ShapeKind::Frame { .. } => write!(f, "frame"),
        }
    }
}

impl FromStr for ShapeSpec {
    type Err = Error;

    /// `cube`, `pyramid:<n>`, `cone`, `cylinder`, `sphere`, `clamp`, `frame`,
    /// optionally followed by `@<samples>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, samples) = match s.split_once('@') {
            Some((n, c)) => (
                n,
                Some(
                    c.parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad sample count in `{s}`")))?,
                ),
            ),
            None => (s, None),
        };
        let spec = match name.split_once(':') {
            Some(("pyramid", n)) => Self::pyramid(
                n.parse()
                    .map_err(|_| Error::invalid(format!("bad pyramid side count `{n}`")))?,
            ),
            None if name == "pyramid" => Self::pyramid(4),
            None => match name {
                "cube" => Self::cube(),
                "cone" => Self::cone(),
                "cylinder" => Self::cylinder(),
                "sphere" => Self::sphere(),
                "clamp" => Self::clamp(),
                "frame" => Self::frame(),
                _ => return Err(Error::invalid(format!("unknown shape `{name}`"))),
            },
            Some(_) => return Err(Error::invalid(format!("unknown shape `{name}`"))),
        };
        let spec = match samples {
            Some(c) => spec.with_samples(c),
            None => spec,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Deterministic in `(spec, seed)`.
pub fn generate_shape(spec: &ShapeSpec, seed: u64) -> Result<PointSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.samples;
    let pts = match spec.kind {
        ShapeKind::Cube { half_edge } => cube(half_edge, n, &mut rng),
        ShapeKind::Pyramid {
            sides,
            base_radius,
            height,
        } => pyramid(sides, base_radius, height, n, &mut rng),
        ShapeKind::Cone { radius, height } => cone(radius, height, n, &mut rng),
        ShapeKind::Cylinder { radius, height } => cylinder(radius, height, n, &mut rng),
        ShapeKind::Sphere { radius } => sphere(radius, n, &mut rng),
        ShapeKind::Clamp {
            length,
            arm_gap,
            arm_width,
            thickness,
            offset,
        } => clamp(length, arm_gap, arm_width, thickness, offset, n, &mut rng),
        ShapeKind::Frame { arms, thickness } => frame(arms, thickness, n, &mut rng),
    };
    PointSet::new(merge_duplicates(pts))
}

fn replicate(patch: &[Vec3], group: &[RotationMatrix]) -> Vec<Vec3> {
    group
        .iter()
        .flat_map(|g| patch.iter().map(move |p| g.apply(p)))
        .collect()
}

fn cyclic(n: u32) -> Vec<RotationMatrix> {
    (0..n)
        .map(|k| RotationMatrix::about_unit_axis(&Vec3::z(), TAU * k as f64 / n as f64))
        .collect()
}

fn triangle_point(rng: &mut ChaCha8Rng, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let (u, v): (f64, f64) = (rng.gen(), rng.gen());
    let su = u.sqrt();
    a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v)
}

fn cube(a: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let per_quarter = n.saturating_sub(8) / 24;
    // +z face, one C4 fundamental quarter, replicated to a C4-invariant face set.
    let quarter: Vec<Vec3> = (0..per_quarter)
        .map(|_| Vec3::new(rng.gen::<f64>() * a, rng.gen::<f64>() * a, a))
        .collect();
    let face = replicate(&quarter, &cyclic(4));
    let h = PI / 2.0;
    let to_faces = [
        RotationMatrix::identity(),
        RotationMatrix::about_unit_axis(&Vec3::x(), PI),
        RotationMatrix::about_unit_axis(&Vec3::y(), h),
        RotationMatrix::about_unit_axis(&Vec3::y(), -h),
        RotationMatrix::about_unit_axis(&Vec3::x(), -h),
        RotationMatrix::about_unit_axis(&Vec3::x(), h),
    ];
    let mut pts = Vec::with_capacity(n);
    for sx in [-a, a] {
        for sy in [-a, a] {
            for sz in [-a, a] {
                pts.push(Vec3::new(sx, sy, sz));
            }
        }
    }
    pts.extend(replicate(&face, &to_faces));
    pts
}

fn pyramid(sides: u32, radius: f64, height: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let step = TAU / sides as f64;
    let v0 = Vec3::new(radius, 0.0, 0.0);
    let v1 = Vec3::new(radius * step.cos(), radius * step.sin(), 0.0);
    let apex = Vec3::new(0.0, 0.0, height);
    let center = Vec3::zeros();
    let side_area = 0.5 * (v0 - apex).cross(&(v1 - apex)).norm();
    let base_area = 0.5 * v0.cross(&v1).norm();
    let per_patch = (n / sides as usize).max(2);
    let edge_count = (per_patch / 12).max(1);
    let interior = per_patch.saturating_sub(edge_count + 1);
    let side_count = (interior as f64 * side_area / (side_area + base_area)).round() as usize;
    let mut patch = vec![v0, apex, center];
    for k in 0..edge_count {
        let t = (k as f64 + 0.5) / edge_count as f64;
        patch.push(v0 * (1.0 - t) + v1 * t);
    }
    for _ in 0..side_count {
        patch.push(triangle_point(rng, &apex, &v0, &v1));
    }
    for _ in side_count..interior {
        patch.push(triangle_point(rng, &center, &v0, &v1));
    }
    replicate(&patch, &cyclic(sides))
}

/// Ring of points at radius `rho` and height `z` with spacing close to `spacing`.
fn ring(rho: f64, z: f64, spacing: f64, rng: &mut ChaCha8Rng, out: &mut Vec<Vec3>) {
    if rho < 1e-12 {
        out.push(Vec3::new(0.0, 0.0, z));
        return;
    }
    let m = ((TAU * rho / spacing).ceil() as usize).max(3);
    let phase = rng.gen::<f64>() * TAU / m as f64;
    for k in 0..m {
        let a = phase + TAU * k as f64 / m as f64;
        out.push(Vec3::new(rho * a.cos(), rho * a.sin(), z));
    }
}

/// Concentric rings filling a disk of radius `r` at height `z`, rim excluded.
fn disk(r: f64, z: f64, spacing: f64, rng: &mut ChaCha8Rng, out: &mut Vec<Vec3>) {
    let rings = (r / spacing).round().max(1.0) as usize;
    for j in 1..rings {
        ring(r * (1.0 - j as f64 / rings as f64), z, spacing, rng, out);
    }
    out.push(Vec3::new(0.0, 0.0, z));
}

fn cone(radius: f64, height: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let slant = (radius * radius + height * height).sqrt();
    let area = PI * radius * (radius + slant);
    let spacing = (area / n as f64).sqrt();
    let mut pts = vec![Vec3::new(0.0, 0.0, height)];
    let rings = (slant / spacing).round().max(1.0) as usize;
    for j in 1..=rings {
        let t = j as f64 / rings as f64;
        ring(radius * t, height * (1.0 - t), spacing, rng, &mut pts);
    }
    disk(radius, 0.0, spacing, rng, &mut pts);
    pts
}

fn cylinder(radius: f64, height: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let area = TAU * radius * (radius + height);
    let spacing = (area / n as f64).sqrt();
    let mut pts = Vec::with_capacity(n);
    let rings = (height / spacing).round().max(1.0) as usize;
    for j in 0..=rings {
        let z = -0.5 * height + height * j as f64 / rings as f64;
        ring(radius, z, spacing, rng, &mut pts);
    }
    disk(radius, 0.5 * height, spacing, rng, &mut pts);
    disk(radius, -0.5 * height, spacing, rng, &mut pts);
    pts
}

fn sphere(radius: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let q = UnitQuaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
    .unwrap_or_else(|_| UnitQuaternion::identity());
    let r = q.to_matrix();
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            r.apply(&(Vec3::new(s * phi.cos(), s * phi.sin(), z) * radius))
        })
        .collect()
}

#[derive(Clone, Copy)]
struct Box3 {
    lo: Vec3,
    hi: Vec3,
}

impl Box3 {
    fn new(lo: Vec3, hi: Vec3) -> Self {
        Self { lo, hi }
    }

    /// Faces as (axis, side) with their areas.
    fn faces(&self) -> [(usize, bool, f64); 6] {
        let d = self.hi - self.lo;
        let a = [d.y * d.z, d.x * d.z, d.x * d.y];
        [
            (0, false, a[0]),
            (0, true, a[0]),
            (1, false, a[1]),
            (1, true, a[1]),
            (2, false, a[2]),
            (2, true, a[2]),
        ]
    }

    fn sample_face(&self, axis: usize, high: bool, rng: &mut ChaCha8Rng) -> Vec3 {
        let mut p = Vec3::zeros();
        for k in 0..3 {
            p[k] = if k == axis {
                if high {
                    self.hi[k]
                } else {
                    self.lo[k]
                }
            } else {
                rng.gen_range(self.lo[k]..self.hi[k])
            };
        }
        p
    }
}

/// Area-weighted surface samples over the listed faces of several boxes.
fn sample_faces(
    faces: &[(Box3, usize, bool, f64)],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec3> {
    let total: f64 = faces.iter().map(|f| f.3).sum();
    let mut out = Vec::with_capacity(n);
    for &(b, axis, high, area) in faces {
        let count = (n as f64 * area / total).round() as usize;
        for _ in 0..count {
            out.push(b.sample_face(axis, high, rng));
        }
    }
    out
}

fn clamp(
    length: f64,
    gap: f64,
    width: f64,
    thickness: f64,
    offset: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec3> {
    let half = 0.5 * length;
    let (d, w, t) = (0.5 * gap, width, 0.5 * thickness);
    let arm = Box3::new(
        Vec3::new(-half + offset, d - 0.5 * w, -t),
        Vec3::new(half, d + 0.5 * w, t),
    );
    // Half of the web; the half-turn about z supplies the other half.
    let web = Box3::new(Vec3::new(-0.5 * w, 0.0, -t), Vec3::new(0.5 * w, d - 0.5 * w, t));
    let mut faces: Vec<(Box3, usize, bool, f64)> =
        arm.faces().iter().map(|&(a, h, ar)| (arm, a, h, ar)).collect();
    // The web's y-faces are glued to the arm or cut at the symmetry plane.
    faces.extend(
        web.faces()
            .iter()
            .filter(|f| f.0 != 1)
            .map(|&(a, h, ar)| (web, a, h, ar)),
    );
    let patch = sample_faces(&faces, n / 2, rng);
    replicate(&patch, &cyclic(2))
}

fn frame(arms: [f64; 3], thickness: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let t = 0.5 * thickness;
    let mut faces = Vec::new();
    for (k, &len) in arms.iter().enumerate() {
        let mut lo = Vec3::new(-t, -t, -t);
        let mut hi = Vec3::new(t, t, t);
        lo[k] = t;
        hi[k] = len;
        let b = Box3::new(lo, hi);
        for (axis, high, area) in b.faces() {
            // The inner end cap is glued to the hub.
            if axis == k && !high {
                continue;
            }
            faces.push((b, axis, high, area));
        }
    }
    let hub = Box3::new(Vec3::new(-t, -t, -t), Vec3::new(t, t, t));
    for (axis, high, area) in hub.faces() {
        if !high {
            faces.push((hub, axis, high, area));
        }
    }
    sample_faces(&faces, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!("pyramid:5".parse::<ShapeSpec>().unwrap(), ShapeSpec::pyramid(5));
        assert_eq!("cube@300".parse::<ShapeSpec>().unwrap().samples, 300);
        assert!("pyramid:2".parse::<ShapeSpec>().is_err());
        assert!("torus".parse::<ShapeSpec>().is_err());
        assert!("sphere@3".parse::<ShapeSpec>().is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        for spec in [ShapeSpec::cube(), ShapeSpec::cone(), ShapeSpec::clamp(), ShapeSpec::frame()] {
            let a = generate_shape(&spec, 4).unwrap();
            let b = generate_shape(&spec, 4).unwrap();
            assert_eq!(a, b);
            let c = generate_shape(&spec, 5).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn sample_counts_near_target() {
        for spec in [
            ShapeSpec::cube(),
            ShapeSpec::pyramid(4),
            ShapeSpec::pyramid(6),
            ShapeSpec::cone(),
            ShapeSpec::cylinder(),
            ShapeSpec::sphere(),
            ShapeSpec::clamp(),
            ShapeSpec::frame(),
        ] {
            let p = generate_shape(&spec, 1).unwrap();
            let n = p.len() as f64;
            assert!((n - 2000.0).abs() < 300.0, "{spec}: {n}");
        }
    }

    #[test]
    fn clamp_is_elongated() {
        let p = generate_shape(&ShapeSpec::clamp(), 0).unwrap();
        let ext = |k: usize| {
            let (lo, hi) = p
                .points()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), q| (l.min(q[k]), h.max(q[k])));
            hi - lo
        };
        assert!(ext(0) >= 4.0 * ext(1));
    }

    #[test]
    fn finite_shapes_are_exactly_invariant() {
        let p = generate_shape(&ShapeSpec::pyramid(5), 2).unwrap();
        let idx = crate::geom::build_nn_index(&p);
        let r = RotationMatrix::about_unit_axis(&Vec3::z(), TAU / 5.0);
        assert!(crate::geom::rotation_residual(p.points(), &idx, &r, f64::INFINITY) < 1e-9);
    }
}
