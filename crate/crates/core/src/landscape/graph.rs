use rayon::prelude::*;

use crate::geom::kdtree::KdTree;
use crate::geom::RotationMatrix;
use crate::{Error, Result};

/// Symmetrized k-nearest-neighbor graph over rotations under geodesic distance.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    neighbors: Vec<Vec<usize>>,
    max_gap: f64,
}

impl NeighborGraph {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Largest geodesic distance from a sample to its nearest other sample.
    pub fn max_gap(&self) -> f64 {
        self.max_gap
    }
}

/// Unit quaternions of both signs in one 4-d tree: Euclidean order on the nearer
/// sign matches geodesic order on rotations.
pub(crate) struct RotationIndex {
    tree: KdTree<4>,
}

impl RotationIndex {
    pub fn new(rotations: &[RotationMatrix]) -> Self {
        let pts = rotations
            .iter()
            .flat_map(|r| {
                let q = r.to_quaternion().coords();
                [q, q.map(|c| -c)]
            })
            .collect();
        Self {
            tree: KdTree::new(pts),
        }
    }

    fn query(r: &RotationMatrix) -> [f64; 4] {
        r.to_quaternion().coords()
    }

    /// The `k` geodesically nearest rotations (possibly including `r` itself),
    /// nearest first, as (index, geodesic distance).
    pub fn knn(&self, r: &RotationMatrix, k: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(k);
        for (i, d2) in self.tree.knn(&Self::query(r), 2 * k) {
            let j = i / 2;
            if !out.iter().any(|(o, _)| *o == j) {
                out.push((j, chord_to_angle(d2.sqrt())));
                if out.len() == k {
                    break;
                }
            }
        }
        out
    }

    /// Indices of rotations within geodesic distance `angle` of `r`, ascending.
    pub fn within(&self, r: &RotationMatrix, angle: f64) -> Vec<usize> {
        let chord = angle_to_chord(angle);
        let mut out: Vec<usize> = self
            .tree
            .within(&Self::query(r), chord * chord)
            .into_iter()
            .map(|i| i / 2)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Rotation angle for a quaternion chord length `|q1 - q2| = 2 sin(theta / 4)`.
fn chord_to_angle(c: f64) -> f64 {
    4.0 * (0.5 * c).min(1.0).asin()
}

fn angle_to_chord(theta: f64) -> f64 {
    2.0 * (0.25 * theta.min(std::f64::consts::PI)).sin()
}

pub fn build_neighbor_graph(rotations: &[RotationMatrix], k: usize) -> Result<NeighborGraph> {
    if k < 4 {
        return Err(Error::invalid("neighbor count must be at least 4"));
    }
    let n = rotations.len();
    let index = RotationIndex::new(rotations);
    let k = k.min(n.saturating_sub(1));
    let lists: Vec<Vec<(usize, f64)>> = rotations
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            index
                .knn(r, k + 1)
                .into_iter()
                .filter(|(j, _)| *j != i)
                .take(k)
                .collect()
        })
        .collect();
    let max_gap = lists
        .iter()
        .filter_map(|l| l.first().map(|(_, d)| *d))
        .fold(0.0, f64::max);
    let mut neighbors: Vec<Vec<usize>> = lists
        .iter()
        .map(|l| l.iter().map(|(j, _)| *j).collect())
        .collect();
    for (i, l) in lists.iter().enumerate() {
        for (j, _) in l {
            neighbors[*j].push(i);
        }
    }
    for l in &mut neighbors {
        l.sort_unstable();
        l.dedup();
    }
    Ok(NeighborGraph { neighbors, max_gap })
}
