//! Rotational symmetry detection and five-way classification.
//!
//! Pipeline: trial rotations about a grid of axes are scored by the Hausdorff
//! distance between the point set and its image, passing axis-angles are clustered
//! by mean shift, each cluster is refined and re-verified, and axes of high order
//! (or invariant under a generic angle) are flagged continuous.

mod group;
mod meanshift;
mod scan;
mod types;

use std::f64::consts::TAU;

pub use group::{random_rotation, SymmetryGroup};
pub use meanshift::{consistent_order, mean_shift_cluster};
pub use scan::fibonacci_axes;
use types::axis_sign;
pub use types::{classify_category, AxisAngle, Category, DetectorConfig, SymmetrySet};

use crate::geom::{build_nn_index, line_angle, normalize_point_set, PointSet};
use crate::{Error, Result};
use scan::Scan;

fn check_centered(p: &PointSet) -> Result<()> {
    if p.centroid().norm() > 1e-6 * p.radius().max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(
            "point set must be centered at its centroid".into(),
        ));
    }
    Ok(())
}

/// All passing axis-angles over the candidate grid, in `+e`/`-e` pairs.
pub fn enumerate_candidates(p: &PointSet, cfg: &DetectorConfig) -> Result<Vec<AxisAngle>> {
    cfg.validate()?;
    check_centered(p)?;
    let index = build_nn_index(p);
    Ok(Scan::new(p.points(), &index, p.radius(), cfg).candidates(cfg))
}

/// Flags axes whose order exceeds `rho` or whose point set is invariant under the
/// generic angle. `p` must be centered.
pub fn extract_continuous(axes: &[AxisAngle], p: &PointSet, cfg: &DetectorConfig) -> Result<Vec<AxisAngle>> {
    check_centered(p)?;
    let index = build_nn_index(p);
    let scan = Scan::new(p.points(), &index, p.radius(), cfg);
    Ok(axes
        .iter()
        .map(|a| a.with_continuous(is_continuous(&scan, a.axis(), a.order(), cfg)))
        .collect())
}

/// The generic angle alone can sit close to a multiple of `2 pi / order` (1 rad is
/// within 3 degrees of a sixth turn), so the half step `pi / order`, where a finite
/// axis is furthest from matching, must pass as well.
fn is_continuous(scan: &Scan, e: crate::geom::Vec3, order: u32, cfg: &DetectorConfig) -> bool {
    let passes = |angle: f64| scan.residual(&e, angle, scan.tol) < scan.tol;
    order > cfg.rho || (passes(cfg.generic_angle) && passes(std::f64::consts::PI / order as f64))
}

/// Detects the symmetry of `p`. The result's axes live in the normalized frame
/// recorded in [`SymmetrySet::normalization`] (directions are unaffected by it).
pub fn detect(p: &PointSet, cfg: &DetectorConfig) -> Result<SymmetrySet> {
    cfg.validate()?;
    let norm = normalize_point_set(p);
    let q = &norm.points;
    let index = build_nn_index(q);
    let radius = q.radius();
    let scan = Scan::new(q.points(), &index, radius, cfg);
    let tol = scan.tol;

    let candidates = scan.candidates(cfg);
    let modes = meanshift::cluster_axes(&candidates, cfg.bandwidth);

    // When several well-separated lines already pass the generic-angle test the
    // object is sphere-like; every axis is a symmetry and refinement adds nothing.
    let mut generic: Vec<crate::geom::Vec3> = Vec::new();
    for m in &modes {
        let order = consistent_order(&m.orders).unwrap_or(2);
        if generic.iter().all(|g| line_angle(g, &m.axis) > 3.0 * cfg.bandwidth)
            && is_continuous(&scan, m.axis, order.min(cfg.rho), cfg)
        {
            generic.push(m.axis);
        }
    }
    let sphere_like = generic.len() >= 2;

    let mut kept: Vec<(crate::geom::Vec3, u32)> = Vec::new();
    for m in &modes {
        let axis = if sphere_like {
            m.axis
        } else {
            // Refine at the largest verified angle, which constrains the axis most.
            let smallest = m.orders.first().copied().unwrap_or(2);
            scan.refine(m.axis, TAU / smallest as f64, 0.25 * cfg.bandwidth).0
        };
        if kept.iter().any(|(e, _)| line_angle(e, &axis) < 0.5 * cfg.bandwidth) {
            continue;
        }
        let orders = if sphere_like {
            m.orders.clone()
        } else {
            scan.verified_orders(&axis, cfg.max_order)
        };
        if let Some(order) = consistent_order(&orders) {
            kept.push((axis, order));
        }
    }

    let mut axes: Vec<AxisAngle> = Vec::with_capacity(2 * kept.len());
    for (e, order) in kept {
        let cont = is_continuous(&scan, e, order, cfg);
        axes.extend(AxisAngle::pair(e, order, cont)?);
    }
    sort_axes(&mut axes);

    let mut sym = SymmetrySet {
        axes,
        category: Category::Asymmetric,
        config: *cfg,
        tolerance: tol,
        radius,
        normalization: norm.normalization,
    };
    sym.category = classify_category(&sym);
    Ok(sym)
}

/// Continuous first, then by decreasing order, then by axis coordinates.
fn sort_axes(axes: &mut [AxisAngle]) {
    axes.sort_by(|a, b| {
        b.is_continuous()
            .cmp(&a.is_continuous())
            .then(b.order().cmp(&a.order()))
            .then_with(|| {
                let (x, y) = (axis_sign(a.axis()), axis_sign(b.axis()));
                x.iter()
                    .zip(y.iter())
                    .map(|(p, q)| q.total_cmp(p))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then_with(|| {
                // Canonical member of the pair first.
                let ca = axis_sign(a.axis()) == a.axis();
                let cb = axis_sign(b.axis()) == b.axis();
                cb.cmp(&ca)
            })
    });
}
