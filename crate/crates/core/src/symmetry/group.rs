//! The proper-symmetry group implied by a set of detected axes.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::types::AxisAngle;
use crate::geom::{geodesic_distance, line_angle, perpendicular, vector_angle, RotationMatrix, UnitQuaternion, Vec3};
use crate::{Error, Result};

/// Larger than the icosahedral group, the biggest finite rotation group with more
/// than one axis.
const MAX_GROUP: usize = 120;
const SAME_ELEMENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryGroup {
    /// All elements, identity first.
    Finite(Vec<RotationMatrix>),
    /// Every rotation about `axis`; with `flip`, also the half-turns about every
    /// perpendicular axis.
    Axial { axis: Vec3, flip: bool },
    /// All of SO(3).
    Full,
}

impl SymmetryGroup {
    pub fn trivial() -> Self {
        Self::Finite(vec![RotationMatrix::identity()])
    }

    /// Builds the group from geometric axes (one per line).
    ///
    /// With two or more continuous axes the group is all of SO(3). With one, the
    /// group is the rotations about it, plus perpendicular half-turns when finite
    /// axes are also present. Otherwise the finite axes generate a finite group; the
    /// generators are first snapped to exact relative angles so the closure is exact.
    pub fn from_axes(axes: &[AxisAngle]) -> Result<Self> {
        let continuous: Vec<&AxisAngle> = axes.iter().filter(|a| a.is_continuous()).collect();
        match continuous.len() {
            0 => {}
            1 => {
                return Ok(Self::Axial {
                    axis: continuous[0].axis(),
                    flip: axes.iter().any(|a| !a.is_continuous()),
                })
            }
            _ => return Ok(Self::Full),
        }
        Self::from_generators(&Self::generators_for_axes(axes))
    }

    /// Finite group generated by `gens` (identity first).
    pub fn from_generators(gens: &[RotationMatrix]) -> Result<Self> {
        Ok(Self::Finite(closure(gens)?))
    }

    /// Generators of the finite group spanned by the finite axes in `axes`: the
    /// highest-order axis and the highest-order axis not parallel to it, with the
    /// angle between them snapped to its exact value.
    pub fn generators_for_axes(axes: &[AxisAngle]) -> Vec<RotationMatrix> {
        let mut finite: Vec<(Vec3, u32)> = Vec::new();
        for a in axes.iter().filter(|a| !a.is_continuous()) {
            if !finite.iter().any(|(e, _)| line_angle(e, &a.axis()) < 1e-9) {
                finite.push((a.axis(), a.order()));
            }
        }
        // `max_by` keeps the last maximum; treating ties as greater keeps the first.
        let first_max = |x: &&(Vec3, u32), y: &&(Vec3, u32)| x.1.cmp(&y.1).then(std::cmp::Ordering::Greater);
        let Some(&(pa, pn)) = finite.iter().max_by(first_max) else {
            return vec![];
        };
        let mut gens = vec![RotationMatrix::about_unit_axis(&pa, TAU / pn as f64)];
        let partner = finite
            .iter()
            .filter(|(e, _)| line_angle(e, &pa) > 1e-3)
            .max_by(first_max);
        if let Some(&(pb, pm)) = partner {
            let snapped = snap_partner(&pa, pn, &pb, pm);
            gens.push(RotationMatrix::about_unit_axis(&snapped, TAU / pm as f64));
        }
        gens
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// Number of elements, if finite.
    pub fn size(&self) -> Option<usize> {
        match self {
            Self::Finite(g) => Some(g.len()),
            _ => None,
        }
    }

    /// Geodesic distance from `r` to the nearest group element.
    pub fn gap(&self, r: &RotationMatrix) -> f64 {
        match self {
            Self::Finite(g) => g
                .iter()
                .map(|s| geodesic_distance(s, r))
                .fold(f64::INFINITY, f64::min),
            Self::Axial { axis, flip } => {
                // The nearest rotation about `axis` differs from `r` by the swing
                // that carries `axis` to `r axis`.
                let beta = vector_angle(axis, &r.apply(axis));
                if *flip {
                    beta.min(PI - beta)
                } else {
                    beta
                }
            }
            Self::Full => 0.0,
        }
    }

    pub fn contains(&self, r: &RotationMatrix, tol: f64) -> bool {
        self.gap(r) <= tol
    }

    /// A finite set of elements that generates the group (for continuous groups, a
    /// representative sample).
    pub fn generators(&self) -> Vec<RotationMatrix> {
        match self {
            Self::Finite(g) => g.iter().skip(1).copied().collect(),
            Self::Axial { axis, flip } => {
                let mut out = vec![
                    RotationMatrix::about_unit_axis(axis, 1.0),
                    RotationMatrix::about_unit_axis(axis, PI / 3.0),
                ];
                if *flip {
                    out.push(RotationMatrix::about_unit_axis(&perpendicular(axis), PI));
                }
                out
            }
            Self::Full => vec![
                RotationMatrix::about_unit_axis(&Vec3::x(), 1.0),
                RotationMatrix::about_unit_axis(&Vec3::y(), 1.0),
            ],
        }
    }

    /// A random element; products of several of these give random group words.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> RotationMatrix {
        match self {
            Self::Finite(g) => g[rng.gen_range(0..g.len())],
            Self::Axial { axis, flip } => {
                let spin = RotationMatrix::about_unit_axis(axis, rng.gen_range(0.0..TAU));
                if *flip && rng.gen_bool(0.5) {
                    let u = RotationMatrix::about_unit_axis(axis, rng.gen_range(0.0..TAU))
                        .apply(&perpendicular(axis));
                    RotationMatrix::about_unit_axis(&u, PI) * spin
                } else {
                    spin
                }
            }
            Self::Full => random_rotation(rng),
        }
    }
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng>(rng: &mut R) -> RotationMatrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|c| c * c).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            if let Ok(u) = UnitQuaternion::new(q[0], q[1], q[2], q[3]) {
                return u.to_matrix();
            }
        }
    }
}

/// Moves `b` so its angle to `a` is the exact value for the group the two axes
/// generate; unknown combinations are left untouched.
fn snap_partner(a: &Vec3, n: u32, b: &Vec3, m: u32) -> Vec3 {
    let along = b.dot(a);
    let perp = b - a * along;
    if perp.norm() < 1e-12 {
        return *b;
    }
    let perp = perp.normalize();
    let line = line_angle(a, b);
    let ideal = match (n, m) {
        // Dihedral: half-turns perpendicular to the main axis.
        (_, 2) => Some(PI / 2.0),
        // Tetrahedral: three-fold axes at arccos(1/3).
        (3, 3) => Some((1.0f64 / 3.0).acos().min(PI - (1.0f64 / 3.0).acos())),
        // Octahedral: four-fold axes are orthogonal.
        (4, 4) => Some(PI / 2.0),
        // Icosahedral: five-fold axes at arctan(2).
        (5, 5) => Some(2f64.atan()),
        _ => None,
    };
    match ideal {
        Some(t) if (t - line).abs() < 0.05 => {
            let sign = if along < 0.0 { -1.0 } else { 1.0 };
            a * (sign * t.cos()) + perp * t.sin()
        }
        _ => *b,
    }
}

fn closure(gens: &[RotationMatrix]) -> Result<Vec<RotationMatrix>> {
    let mut elems = vec![RotationMatrix::identity()];
    let mut frontier = 0;
    while frontier < elems.len() {
        let g = elems[frontier];
        frontier += 1;
        for h in gens {
            let p = (*h * g).renormalized();
            if !elems.iter().any(|e| (e.matrix() - p.matrix()).abs().max() < SAME_ELEMENT) {
                elems.push(p);
                if elems.len() > MAX_GROUP {
                    return Err(Error::Precondition(
                        "symmetry axes do not generate a finite rotation group".into(),
                    ));
                }
            }
        }
    }
    Ok(elems)
}
