//! Flat-kernel mean shift over axis lines.

use super::types::{axis_sign, AxisAngle};
use crate::geom::{line_angle, Vec3};

const MAX_ITERS: usize = 100;
const CONVERGENCE: f64 = 1e-6;

/// A converged axis line with the orders of the candidates assigned to it.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AxisMode {
    pub axis: Vec3,
    pub orders: Vec<u32>,
    pub support: usize,
}

/// Largest order whose divisors (>= 2) are all present.
///
/// This is the order whose angle is a multiple of every other kept angle; orders
/// inconsistent with it are dropped as noise.
pub fn consistent_order(orders: &[u32]) -> Option<u32> {
    orders
        .iter()
        .copied()
        .filter(|&n| (2..=n).filter(|d| n % d == 0).all(|d| orders.contains(&d)))
        .max()
}

fn shift(seed: Vec3, dirs: &[(Vec3, usize)], bandwidth: f64) -> Vec3 {
    let mut m = seed;
    for _ in 0..MAX_ITERS {
        let mut sum = Vec3::zeros();
        for (d, w) in dirs {
            if line_angle(&m, d) <= bandwidth {
                let s = if m.dot(d) < 0.0 { -1.0 } else { 1.0 };
                sum += d * (s * *w as f64);
            }
        }
        let n = sum.norm();
        if n < 1e-12 {
            break;
        }
        let next = sum / n;
        let moved = line_angle(&next, &m);
        m = next;
        if moved < CONVERGENCE {
            break;
        }
    }
    axis_sign(m)
}

pub(crate) fn cluster_axes(candidates: &[AxisAngle], bandwidth: f64) -> Vec<AxisMode> {
    // Unique lines with their orders; the two signs of a pair collapse.
    let mut lines: Vec<(Vec3, Vec<u32>)> = Vec::new();
    for c in candidates {
        let e = axis_sign(c.axis());
        match lines.iter_mut().find(|(d, _)| line_angle(d, &e) < 1e-12) {
            Some((_, orders)) => {
                if !orders.contains(&c.order()) {
                    orders.push(c.order());
                }
            }
            None => lines.push((e, vec![c.order()])),
        }
    }
    let dirs: Vec<(Vec3, usize)> = lines.iter().map(|(d, o)| (*d, o.len())).collect();
    let support = |m: &Vec3| {
        dirs.iter()
            .filter(|(d, _)| line_angle(m, d) <= bandwidth)
            .map(|(_, w)| w)
            .sum::<usize>()
    };
    let mut modes: Vec<(Vec3, usize, usize)> = dirs
        .iter()
        .enumerate()
        .map(|(i, (d, _))| {
            let m = shift(*d, &dirs, bandwidth);
            (m, support(&m), i)
        })
        .collect();
    modes.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let mut kept: Vec<AxisMode> = Vec::new();
    for (m, s, _) in modes {
        if kept.iter().all(|k| line_angle(&k.axis, &m) > bandwidth) {
            kept.push(AxisMode {
                axis: m,
                orders: Vec::new(),
                support: s,
            });
        }
    }
    for (d, orders) in &lines {
        let nearest = kept
            .iter_mut()
            .min_by(|a, b| line_angle(&a.axis, d).total_cmp(&line_angle(&b.axis, d)));
        if let Some(k) = nearest {
            for o in orders {
                if !k.orders.contains(o) {
                    k.orders.push(*o);
                }
            }
        }
    }
    for k in &mut kept {
        k.orders.sort_unstable();
    }
    kept
}

/// Collapses candidates to one `+e`/`-e` pair per axis line, keeping the
/// consistent (greatest-common-divisor) angle.
pub fn mean_shift_cluster(candidates: &[AxisAngle], bandwidth: f64) -> Vec<AxisAngle> {
    cluster_axes(candidates, bandwidth)
        .into_iter()
        .filter_map(|m| {
            let order = consistent_order(&m.orders)?;
            AxisAngle::pair(m.axis, order, false).ok()
        })
        .flatten()
        .collect()
}
