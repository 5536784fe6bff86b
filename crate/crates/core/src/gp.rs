//! Grouped primitives: a handful of points abstracting the object, partitioned into
//! orbits of its symmetry group.
//!
//! Primitives are the centroid, the two endpoints of every symmetry axis at the
//! object radius and, for finite groups, the orbit of one generic seed point near
//! the equator of the highest-order axis, so that rotations about a finite axis are
//! not invisible to the metric. Cyclic groups get a second, mirrored ring.
//!
//! The seed sits at half the radius and 1.5 rad off the axis. Placing it at the full
//! radius lets a rotation swap seeds with axis endpoints, and one seed per axis
//! crowds the sphere for the large groups; both leave genuine local minima of the
//! distance away from every symmetry.

use serde::{Deserialize, Serialize};

use crate::geom::{line_angle, perpendicular, RigidTransform, RotationMatrix, Vec3};
use crate::symmetry::{AxisAngle, Category, SymmetryGroup, SymmetrySet};
use crate::{Error, Result};

/// Seeds closer than this to any axis line are rejected.
const SEED_AXIS_CLEARANCE_DEG: f64 = 5.0;
/// Two orbit points closer than this (times the radius) mean a degenerate seed.
const SEED_MIN_SEPARATION: f64 = 1e-3;
const SEED_AZIMUTH_STEP: f64 = 0.37;
const SEED_POLAR: f64 = 1.5;
const SEED_RADIUS: f64 = 0.5;
/// Radius of the second ring of a 2-fold group, relative to the first.
const ORDER2_RING_SCALE: f64 = 0.7;
/// Points within this distance (times the radius) are the same primitive.
const SAME_POINT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPrimitives {
    groups: Vec<Vec<Vec3>>,
    category: Category,
    radius: f64,
    /// Model units per normalized unit is `1 / scale`.
    scale: f64,
    group: SymmetryGroup,
    generators: Vec<RotationMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawGp {
    category: Category,
    radius: f64,
    #[serde(default = "unit")]
    scale: f64,
    groups: Vec<Vec<[f64; 3]>>,
    #[serde(default)]
    generators: Vec<RotationMatrix>,
    #[serde(default)]
    continuous_axes: Vec<[f64; 3]>,
}

fn unit() -> f64 {
    1.0
}

impl GroupedPrimitives {
    pub fn groups(&self) -> &[Vec<Vec3>] {
        &self.groups
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The normalization scale of the source model (1 when built from raw axes).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid("scale must be positive"));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Proper-symmetry group the grouping was built from.
    pub fn symmetry_group(&self) -> &SymmetryGroup {
        &self.group
    }

    /// Generators of the finite part of the symmetry group.
    pub fn generators(&self) -> &[RotationMatrix] {
        &self.generators
    }

    pub fn primitive_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let continuous_axes = match &self.group {
            SymmetryGroup::Axial { axis, .. } => vec![(*axis).into()],
            _ => vec![],
        };
        let raw = RawGp {
            category: self.category,
            radius: self.radius,
            scale: self.scale,
            groups: self
                .groups
                .iter()
                .map(|g| g.iter().map(|p| (*p).into()).collect())
                .collect(),
            generators: self.generators.clone(),
            continuous_axes,
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGp = serde_json::from_str(text)?;
        if !(raw.radius.is_finite() && raw.radius > 0.0) {
            return Err(Error::invalid("GP radius must be positive"));
        }
        if raw.groups.is_empty() || raw.groups.iter().any(Vec::is_empty) {
            return Err(Error::invalid("GP groups must be non-empty"));
        }
        if raw.groups.iter().flatten().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("GP contains a non-finite coordinate"));
        }
        let group = match raw.category {
            Category::Cat5 => SymmetryGroup::Full,
            Category::Cat3 | Category::Cat4 => {
                let axis = raw
                    .continuous_axes
                    .first()
                    .map(|a| Vec3::from(*a))
                    .filter(|a| a.norm() > 1e-12)
                    .ok_or_else(|| Error::invalid("GP of this category needs a continuous axis"))?;
                // Renormalizing an already unit axis would perturb its last bits.
                let n = axis.norm();
                SymmetryGroup::Axial {
                    axis: if (n - 1.0).abs() > 1e-12 { axis / n } else { axis },
                    flip: raw.category == Category::Cat4,
                }
            }
            _ => SymmetryGroup::from_generators(&raw.generators)?,
        };
        Ok(Self {
            groups: raw
                .groups
                .into_iter()
                .map(|g| g.into_iter().map(Vec3::from).collect())
                .collect(),
            category: raw.category,
            radius: raw.radius,
            scale: raw.scale,
            group,
            generators: raw.generators,
        })
    }
}

/// Builds grouped primitives at radius `r` (normalized units) from a symmetry set.
pub fn build_gp(sym: &SymmetrySet, r: f64) -> Result<GroupedPrimitives> {
    let geo = sym.geometric_axes();
    let mut gp = build_gp_from_axes(&geo, r)?;
    gp.scale = sym.normalization.scale;
    Ok(gp)
}

/// Builds grouped primitives from geometric axes (one per line, continuous ones
/// flagged).
pub fn build_gp_from_axes(axes: &[AxisAngle], r: f64) -> Result<GroupedPrimitives> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("GP radius must be positive"));
    }
    let nc = axes.iter().filter(|a| a.is_continuous()).count();
    let category = Category::from_counts(nc, axes.len() - nc);
    let group = SymmetryGroup::from_axes(axes)?;
    let origin = Vec3::zeros();
    let (groups, generators) = match &group {
        SymmetryGroup::Full => (vec![vec![origin]], vec![]),
        SymmetryGroup::Axial { axis, flip } => {
            let (top, bottom) = (axis * r, -axis * r);
            let groups = if *flip {
                vec![vec![origin], vec![top, bottom]]
            } else {
                vec![vec![origin], vec![top], vec![bottom]]
            };
            (groups, vec![])
        }
        SymmetryGroup::Finite(elems) if elems.len() == 1 => {
            let mut groups = vec![vec![origin]];
            for e in [Vec3::x(), Vec3::y(), Vec3::z()] {
                groups.push(vec![e * r]);
                groups.push(vec![-e * r]);
            }
            (groups, vec![])
        }
        SymmetryGroup::Finite(elems) => {
            let lines = group_lines(elems);
            let mut prims = vec![origin];
            for (e, _) in &lines {
                prims.push(e * r);
                prims.push(-e * r);
            }
            // First line of highest order.
            let principal = lines
                .iter()
                .fold(&lines[0], |best, l| if l.1 > best.1 { l } else { best });
            let orbit = seed_orbit(elems, &lines, &principal.0, r)?;
            if lines.len() == 1 {
                prims.extend(mirrored_ring(&orbit, &principal.0, principal.1));
            }
            prims.extend(orbit);
            (orbit_partition(&prims, elems, r), SymmetryGroup::generators_for_axes(axes))
        }
    };
    Ok(GroupedPrimitives {
        groups: sort_groups(groups),
        category,
        radius: r,
        scale: 1.0,
        group,
        generators,
    })
}

/// Rotation lines of a finite group with their orders.
fn group_lines(elems: &[RotationMatrix]) -> Vec<(Vec3, u32)> {
    let mut lines: Vec<(Vec3, u32)> = Vec::new();
    for g in elems {
        let v = g.to_rotation_vector();
        if v.angle() < 1e-9 {
            continue;
        }
        let e = crate::geom::canonical_sign(v.vector() / v.angle());
        match lines.iter_mut().find(|(d, _)| line_angle(d, &e) < 1e-6) {
            Some(l) => l.1 += 1,
            None => lines.push((e, 1)),
        }
    }
    for l in &mut lines {
        l.1 += 1;
    }
    lines
}

/// Cyclic groups only: the seed ring reflected through the equatorial plane and
/// turned by half a step. With a single ring, spinning it between symmetric
/// positions and sliding it sideways brings every point nearer a neighbor at
/// once, which gives the max-distance metric genuine local minima in SE(3).
///
/// For order 2 half a step is a quarter turn, and the two rings would form a
/// near-square with an almost 4-fold pattern and a spurious basin near 90 degrees.
/// There the ring turns by a quarter step and shrinks instead.
fn mirrored_ring(orbit: &[Vec3], axis: &Vec3, order: u32) -> Vec<Vec3> {
    let (step, scale) = if order == 2 {
        (0.25, ORDER2_RING_SCALE)
    } else {
        (0.5, 1.0)
    };
    let turn = RotationMatrix::about_unit_axis(axis, step * std::f64::consts::TAU / order as f64);
    orbit
        .iter()
        .map(|p| turn.apply(&(p - axis * (2.0 * p.dot(axis)))) * scale)
        .collect()
}

fn seed_orbit(elems: &[RotationMatrix], lines: &[(Vec3, u32)], e: &Vec3, r: f64) -> Result<Vec<Vec3>> {
    let u = perpendicular(e);
    let v = e.cross(&u);
    let clearance = SEED_AXIS_CLEARANCE_DEG.to_radians();
    for k in 0..200 {
        let phi = SEED_AZIMUTH_STEP * k as f64;
        let dir = (u * phi.cos() + v * phi.sin()) * SEED_POLAR.sin() + e * SEED_POLAR.cos();
        if lines.iter().any(|(l, _)| line_angle(l, &dir) < clearance) {
            continue;
        }
        let seed = dir * (SEED_RADIUS * r);
        let orbit: Vec<Vec3> = elems.iter().map(|g| g.apply(&seed)).collect();
        let separated = orbit.iter().enumerate().all(|(i, a)| {
            orbit[i + 1..]
                .iter()
                .all(|b| (a - b).norm() > SEED_MIN_SEPARATION * r)
        });
        if separated {
            return Ok(orbit);
        }
    }
    Err(Error::Precondition("no generic seed point found for the symmetry group".into()))
}

fn orbit_partition(prims: &[Vec3], elems: &[RotationMatrix], r: f64) -> Vec<Vec<Vec3>> {
    let same = SAME_POINT * r;
    let mut groups: Vec<Vec<Vec3>> = Vec::new();
    for p in prims {
        if groups.iter().flatten().any(|q| (p - q).norm() < same) {
            continue;
        }
        let mut orbit: Vec<Vec3> = Vec::new();
        for g in elems {
            let q = g.apply(p);
            if !orbit.iter().any(|o| (o - q).norm() < same) {
                orbit.push(q);
            }
        }
        groups.push(orbit);
    }
    groups
}

fn snap(p: Vec3) -> Vec3 {
    p.map(|c| if c.abs() < 1e-12 { 0.0 } else { c })
}

fn lex(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Points sorted lexicographically within groups; groups by (size, first point).
fn sort_groups(groups: Vec<Vec<Vec3>>) -> Vec<Vec<Vec3>> {
    let mut groups: Vec<Vec<Vec3>> = groups
        .into_iter()
        .map(|g| {
            let mut g: Vec<Vec3> = g.into_iter().map(snap).collect();
            g.sort_by(lex);
            g
        })
        .collect();
    groups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| lex(&a[0], &b[0])));
    groups
}

/// Primitive coordinates under `t`; group structure is unchanged.
pub fn transform_gp(gp: &GroupedPrimitives, t: &RigidTransform) -> Vec<Vec<Vec3>> {
    gp.groups
        .iter()
        .map(|g| g.iter().map(|p| t.apply(p)).collect())
        .collect()
}
