//! Candidate axis-angles: residual of the point set under trial rotations.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::types::{AxisAngle, DetectorConfig};
use crate::geom::{median_spacing, perpendicular, rotation_residual, NnIndex, RotationMatrix, Vec3};

/// Smallest step of the axis refinement, radians.
const MIN_STEP: f64 = 1e-4;
const MAX_EVALS: usize = 400;
/// The spacing floor never raises the tolerance above this multiple of `epsilon * radius`.
const FLOOR_CAP: f64 = 2.0;

/// Directions on the upper hemisphere whose lines cover the sphere as densely as
/// `count` Fibonacci points would.
pub fn fibonacci_axes(count: usize) -> Vec<Vec3> {
    let m = (count / 2).max(1);
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / m as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(s * phi.cos(), s * phi.sin(), z)
        })
        .collect()
}

/// A centered point set with its index and tolerances.
pub(crate) struct Scan<'a> {
    pub points: &'a [Vec3],
    pub index: &'a NnIndex,
    pub radius: f64,
    pub tol: f64,
}

impl<'a> Scan<'a> {
    pub fn new(points: &'a [Vec3], index: &'a NnIndex, radius: f64, cfg: &DetectorConfig) -> Self {
        let spacing = median_spacing(points, index);
        let base = cfg.epsilon * radius;
        // The spacing floor only matters for dense samples; sparse vertex sets match
        // exactly and must not inherit a loose tolerance.
        let tol = base.max((cfg.resolution_scale * spacing).min(FLOOR_CAP * base));
        Self {
            points,
            index,
            radius,
            tol,
        }
    }

    /// `h(P, R(e, angle) P)`; exact when `<= abort`.
    pub fn residual(&self, e: &Vec3, angle: f64, abort: f64) -> f64 {
        rotation_residual(self.points, self.index, &RotationMatrix::about_unit_axis(e, angle), abort)
    }

    /// Coordinate descent of the residual over the axis direction.
    pub fn refine(&self, e0: Vec3, angle: f64, start_step: f64) -> (Vec3, f64) {
        let mut best = (e0, self.residual(&e0, angle, f64::INFINITY));
        let mut step = start_step;
        let mut evals = 1;
        while step > MIN_STEP && evals < MAX_EVALS {
            let u = perpendicular(&best.0);
            let v = best.0.cross(&u);
            let (s, c) = step.sin_cos();
            let mut improved = false;
            for dir in [u, -u, v, -v] {
                let cand = (best.0 * c + dir * s).normalize();
                let h = self.residual(&cand, angle, best.1);
                evals += 1;
                if h < best.1 {
                    best = (cand, h);
                    improved = true;
                    break;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best
    }

    /// Orders in `2..=max_order` whose rotation about `e` passes the tolerance.
    pub fn verified_orders(&self, e: &Vec3, max_order: u32) -> Vec<u32> {
        (2..=max_order)
            .filter(|&i| self.residual(e, TAU / i as f64, self.tol) < self.tol)
            .collect()
    }

    pub fn candidates(&self, cfg: &DetectorConfig) -> Vec<AxisAngle> {
        let axes = fibonacci_axes(cfg.axis_candidates);
        let spacing = (4.0 * PI / cfg.axis_candidates as f64).sqrt();
        // A true axis is at most about one grid spacing from some grid direction; the
        // residual there grows by at most twice that offset times the radius.
        let loose = self.tol + 1.8 * spacing * self.radius;
        let found: Vec<Vec<AxisAngle>> = axes
            .par_iter()
            .map(|e| {
                let mut out = Vec::new();
                for i in 2..=cfg.max_order {
                    let angle = TAU / i as f64;
                    let h = self.residual(e, angle, loose);
                    let axis = if h < self.tol {
                        Some(*e)
                    } else if h < loose {
                        let (r, hr) = self.refine(*e, angle, 0.5 * spacing);
                        (hr < self.tol).then_some(r)
                    } else {
                        None
                    };
                    if let Some(a) = axis {
                        if let Ok(pair) = AxisAngle::pair(a, i, false) {
                            out.extend(pair);
                        }
                    }
                }
                out
            })
            .collect();
        found.into_iter().flatten().collect()
    }
}
