use super::kdtree::KdTree;
use super::{PointSet, RotationMatrix, Vec3};
use crate::{Error, Result};

/// Exact nearest-neighbor index over a point set.
#[derive(Debug, Clone)]
pub struct NnIndex {
    tree: KdTree<3>,
}

pub fn build_nn_index(p: &PointSet) -> NnIndex {
    NnIndex::from_points(p.points())
}

impl NnIndex {
    pub fn from_points(points: &[Vec3]) -> Self {
        Self {
            tree: KdTree::new(points.iter().map(|p| [p.x, p.y, p.z]).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Nearest stored point (lowest index on ties) and its distance.
    pub fn nearest(&self, q: &Vec3) -> (usize, f64) {
        let (i, d2) = self
            .tree
            .nearest(&[q.x, q.y, q.z])
            .expect("index built over a non-empty set");
        (i, d2.sqrt())
    }

    pub fn any_within(&self, q: &Vec3, r: f64) -> bool {
        self.tree.any_within(&[q.x, q.y, q.z], r * r)
    }

    pub fn within(&self, q: &Vec3, r: f64) -> Vec<usize> {
        self.tree.within(&[q.x, q.y, q.z], r * r)
    }

    pub fn knn(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        self.tree
            .knn(&[q.x, q.y, q.z], k)
            .into_iter()
            .map(|(i, d2)| (i, d2.sqrt()))
            .collect()
    }
}

/// `max_{a in queries} min_{b in index} |a - b|` with early termination.
///
/// Returns the exact directed distance when it is `<= abort`; otherwise some value
/// `> abort`. `start` seeds the running maximum (it is returned if nothing exceeds it).
fn directed<I>(queries: I, index: &NnIndex, start: f64, abort: f64) -> f64
where
    I: Iterator<Item = Vec3>,
{
    let mut cmax = start;
    for q in queries {
        // A neighbor within the running max cannot raise it.
        if index.any_within(&q, cmax) {
            continue;
        }
        let (_, d) = index.nearest(&q);
        if d > cmax {
            cmax = d;
            if cmax > abort {
                return cmax;
            }
        }
    }
    cmax
}

pub fn directed_hausdorff(from: &[Vec3], to: &NnIndex) -> f64 {
    directed(from.iter().copied(), to, 0.0, f64::INFINITY)
}

/// Symmetric Hausdorff distance; `a_index` must index `a`, `b_index` must index `b`.
pub fn hausdorff_distance(a: &PointSet, a_index: &NnIndex, b: &PointSet, b_index: &NnIndex) -> Result<f64> {
    if a_index.len() != a.len() || b_index.len() != b.len() {
        return Err(Error::invalid("index does not match its point set"));
    }
    let ab = directed_hausdorff(a.points(), b_index);
    Ok(directed(b.points().iter().copied(), a_index, ab, f64::INFINITY))
}

/// `h(P, R P)` using only the index over `P`.
///
/// `min_q |p - R q| = min_q |R^T p - q|`, so both directions query the same tree.
/// Exact when the result is `<= abort`, otherwise some value `> abort`.
pub fn rotation_residual(p: &[Vec3], index: &NnIndex, r: &RotationMatrix, abort: f64) -> f64 {
    let rt = r.transpose();
    let forward = directed(p.iter().map(|q| r.apply(q)), index, 0.0, abort);
    if forward > abort {
        return forward;
    }
    directed(p.iter().map(|q| rt.apply(q)), index, forward, abort)
}

/// Median distance from each point to its nearest other point.
pub fn median_spacing(p: &[Vec3], index: &NnIndex) -> f64 {
    if p.len() < 2 {
        return 0.0;
    }
    let mut d: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, q)| {
            index
                .knn(q, 2)
                .into_iter()
                .find(|&(j, _)| j != i)
                .map(|(_, d)| d)
                .unwrap_or(0.0)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RigidTransform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn brute(a: &[Vec3], b: &[Vec3]) -> f64 {
        let dir = |x: &[Vec3], y: &[Vec3]| {
            x.iter()
                .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        dir(a, b).max(dir(b, a))
    }

    fn square() -> PointSet {
        PointSet::new(vec![
            Vec3::new(0.5, 0.5, 0.0),
            Vec3::new(-0.5, 0.5, 0.0),
            Vec3::new(-0.5, -0.5, 0.0),
            Vec3::new(0.5, -0.5, 0.0),
        ])
        .unwrap()
    }

    fn h(a: &PointSet, b: &PointSet) -> f64 {
        hausdorff_distance(a, &build_nn_index(a), b, &build_nn_index(b)).unwrap()
    }

    #[test]
    fn self_distance_zero() {
        let s = square();
        assert_eq!(h(&s, &s), 0.0);
    }

    #[test]
    fn square_quarter_turn() {
        let s = square();
        let r = RotationMatrix::from_axis_angle(&Vec3::z(), PI / 2.0).unwrap();
        assert!(h(&s, &s.rotated(&r)) < 1e-15);
        assert!(rotation_residual(s.points(), &build_nn_index(&s), &r, f64::INFINITY) < 1e-15);
    }

    #[test]
    fn square_eighth_turn() {
        let s = square();
        let r = RotationMatrix::from_axis_angle(&Vec3::z(), PI / 4.0).unwrap();
        let rotated = s.rotated(&r);
        let oracle = brute(s.points(), rotated.points());
        // Frozen from the all-pairs oracle: sqrt((sqrt(0.5) - 0.5)^2 + 0.25).
        assert!((oracle - 0.541_196_100_146_197).abs() < 1e-12);
        assert!((h(&s, &rotated) - oracle).abs() < 1e-9);
    }

    #[test]
    fn matches_brute_force_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let na = rng.gen_range(1..200);
            let nb = rng.gen_range(1..200);
            let a: Vec<Vec3> = (0..na).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
            let b: Vec<Vec3> = (0..nb).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
            let (pa, pb) = (PointSet::new(a.clone()).unwrap(), PointSet::new(b.clone()).unwrap());
            let oracle = brute(&a, &b);
            assert!((h(&pa, &pb) - oracle).abs() < 1e-9);
            assert!((h(&pb, &pa) - oracle).abs() < 1e-9);
            let t = RigidTransform::new(
                RotationMatrix::from_axis_angle(&Vec3::new(rng.gen(), rng.gen(), 1.0), rng.gen()).unwrap(),
                Vec3::new(rng.gen(), rng.gen(), rng.gen()),
            );
            assert!((h(&pa.transformed(&t), &pb.transformed(&t)) - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_matches_explicit_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<Vec3> = (0..300)
            .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2)))
            .collect();
        let p = PointSet::new(a).unwrap();
        let idx = build_nn_index(&p);
        for k in 0..10 {
            let r = RotationMatrix::from_axis_angle(&Vec3::new(0.1 * k as f64, 1.0, 0.3), 0.3 * k as f64).unwrap();
            let oracle = brute(p.points(), p.rotated(&r).points());
            assert!((rotation_residual(p.points(), &idx, &r, f64::INFINITY) - oracle).abs() < 1e-12);
            // Early abort reports something above the bound.
            if oracle > 0.05 {
                assert!(rotation_residual(p.points(), &idx, &r, 0.05) > 0.05);
            }
        }
    }
}
