use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::RotationIndex;
use super::Landscape;
use crate::geom::{RotationMatrix, Vec3};
use crate::symmetry::SymmetryGroup;

/// A cluster with more terminals than this is reported as a manifold of minima
/// (a continuous symmetry family) rather than an isolated minimum.
pub const MANIFOLD_TERMINALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    /// Sample index of the lowest terminal in the cluster.
    pub index: usize,
    pub rotation: RotationMatrix,
    pub v: Vec3,
    pub d: f64,
    /// Number of samples whose descent ends in this cluster.
    pub basin: usize,
    pub terminals: Vec<usize>,
    /// Largest geodesic gap from a terminal of the cluster to the symmetry group.
    pub nearest_sym_gap: f64,
    pub correct: bool,
    pub manifold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaReport {
    pub minima: Vec<Minimum>,
    pub max_gap: f64,
    /// Merge radius and correctness bound: twice the max neighbor gap.
    pub tolerance: f64,
    pub all_correct: bool,
}

/// Strict "lower" with ties broken by index.
fn lower(l: &Landscape, a: usize, b: usize) -> bool {
    let (da, db) = (l.samples[a].d, l.samples[b].d);
    da < db || (da == db && a < b)
}

/// Follows strictly decreasing neighbor steps from every sample, clusters the end
/// points and checks each cluster against the proper-symmetry group.
pub fn descend_to_minima(landscape: &Landscape, group: &SymmetryGroup) -> MinimaReport {
    let samples = &landscape.samples;
    let n = samples.len();
    let next: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = i;
            for &j in &samples[i].neighbors {
                if samples[j].d < samples[i].d && (best == i || lower(landscape, j, best)) {
                    best = j;
                }
            }
            best
        })
        .collect();

    // Every step strictly lowers d, so paths end; memoize terminals.
    let mut terminal = vec![usize::MAX; n];
    let mut path = Vec::new();
    for start in 0..n {
        let mut i = start;
        while terminal[i] == usize::MAX && next[i] != i {
            path.push(i);
            i = next[i];
        }
        let t = if next[i] == i { i } else { terminal[i] };
        terminal[i] = t;
        for p in path.drain(..) {
            terminal[p] = t;
        }
    }

    let mut ends: Vec<usize> = terminal.clone();
    ends.sort_unstable();
    ends.dedup();
    let tolerance = 2.0 * landscape.max_gap;

    // Single-linkage clustering of terminals within the merge radius.
    let rots: Vec<RotationMatrix> = ends.iter().map(|&i| samples[i].rotation).collect();
    let index = RotationIndex::new(&rots);
    let links: Vec<Vec<usize>> = rots.par_iter().map(|r| index.within(r, tolerance)).collect();
    let mut parent: Vec<usize> = (0..ends.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, ls) in links.iter().enumerate() {
        for &b in ls {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    let mut basin = vec![0usize; n];
    for &t in &terminal {
        basin[t] += 1;
    }
    let gaps: Vec<f64> = ends.par_iter().map(|&i| group.gap(&samples[i].rotation)).collect();

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); ends.len()];
    for a in 0..ends.len() {
        let root = find(&mut parent, a);
        clusters[root].push(a);
    }
    let mut minima: Vec<Minimum> = clusters
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let best = c
                .iter()
                .map(|&a| ends[a])
                .min_by(|&a, &b| samples[a].d.total_cmp(&samples[b].d).then(a.cmp(&b)))
                .expect("non-empty cluster");
            let gap = c.iter().map(|&a| gaps[a]).fold(0.0, f64::max);
            Minimum {
                index: best,
                rotation: samples[best].rotation,
                v: samples[best].v,
                d: samples[best].d,
                basin: c.iter().map(|&a| basin[ends[a]]).sum(),
                terminals: c.iter().map(|&a| ends[a]).collect(),
                nearest_sym_gap: gap,
                correct: gap < tolerance,
                manifold: c.len() > MANIFOLD_TERMINALS,
            }
        })
        .collect();
    minima.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.index.cmp(&b.index)));
    let all_correct = minima.iter().all(|m| m.correct);
    MinimaReport {
        minima,
        max_gap: landscape.max_gap,
        tolerance,
        all_correct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::geodesic_distance;
    use crate::gp::build_gp_from_axes;
    use crate::landscape::build_landscape;
    use crate::metrics::{MetricKind, PoseDistance};
    use crate::symmetry::AxisAngle;
    use std::f64::consts::FRAC_PI_2;

    fn report(axes: &[AxisAngle], kind: MetricKind, n: usize) -> (Landscape, MinimaReport) {
        let gp = build_gp_from_axes(axes, 1.0).unwrap();
        let group = gp.symmetry_group().clone();
        let l = build_landscape(&PoseDistance::grouped(gp, kind).unwrap(), n, 12, 5).unwrap();
        let r = descend_to_minima(&l, &group);
        (l, r)
    }

    #[test]
    fn asymmetric_has_single_minimum_at_identity() {
        let (l, r) = report(&[], MetricKind::Agpd, 3000);
        assert_eq!(r.minima.len(), 1);
        assert_eq!(r.minima[0].index, 0);
        assert_eq!(r.minima[0].basin, l.len());
        assert!(r.all_correct);
    }

    #[test]
    fn pyramid_minima_are_quarter_turns() {
        let (l, r) = report(&[AxisAngle::new(Vec3::z(), 4).unwrap()], MetricKind::Mgpd, 4000);
        assert!(r.all_correct);
        assert_eq!(r.minima.len(), 4);
        for m in &r.minima {
            let near = (0..4)
                .map(|k| geodesic_distance(&m.rotation, &RotationMatrix::about_unit_axis(&Vec3::z(), k as f64 * FRAC_PI_2)))
                .fold(f64::INFINITY, f64::min);
            assert!(near < r.tolerance);
            // Graph-local minimum.
            for &j in &l.samples[m.index].neighbors {
                assert!(m.d <= l.samples[j].d);
            }
        }
        assert_eq!(r.minima.iter().map(|m| m.basin).sum::<usize>(), l.len());
    }

    #[test]
    fn descent_is_monotone_and_terminals_are_local_minima() {
        let (l, r) = report(&[AxisAngle::new(Vec3::z(), 3).unwrap()], MetricKind::Agpd, 1500);
        for m in &r.minima {
            for &t in &m.terminals {
                assert!(l.samples[t].neighbors.iter().all(|&j| l.samples[j].d >= l.samples[t].d));
            }
        }
    }
}
