//! Pose distances: grouped-primitive distances (average and maximum) and the
//! ADD / ADD-S baselines, with AUC aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{NnIndex, PointSet, RigidTransform, Vec3};
use crate::gp::GroupedPrimitives;
use crate::symmetry::Category;
use crate::{Error, Result};

/// Number of thresholds on the AUC grid.
pub const AUC_GRID: usize = 1000;
/// Default AUC threshold range (0.1 m on metric models).
pub const DEFAULT_AUC_MAX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Agpd,
    Mgpd,
    /// MGPD for category 2, AGPD otherwise.
    Amgpd,
    Add,
    #[serde(rename = "adds")]
    AddS,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Agpd => "agpd",
            Self::Mgpd => "mgpd",
            Self::Amgpd => "amgpd",
            Self::Add => "add",
            Self::AddS => "adds",
        }
    }

    /// True for ADD and ADD-S, which need the model points.
    pub fn needs_model(&self) -> bool {
        matches!(self, Self::Add | Self::AddS)
    }

    /// The concrete grouped metric used for a category.
    pub fn resolve(&self, category: Category) -> Self {
        match self {
            Self::Amgpd if category == Category::Cat2 => Self::Mgpd,
            Self::Amgpd => Self::Agpd,
            k => *k,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "agpd" => Self::Agpd,
            "mgpd" => Self::Mgpd,
            "amgpd" | "a(m)gpd" => Self::Amgpd,
            "add" => Self::Add,
            "adds" | "add-s" => Self::AddS,
            _ => return Err(Error::invalid(format!("unknown metric `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub kind: MetricKind,
}

/// Within-group nearest-point distances, reduced by mean (`max = false`) or max.
///
/// The nearest point ranges over the whole group including the point itself, so
/// the distance between equal poses is zero.
fn grouped(gp: &GroupedPrimitives, t_hat: &RigidTransform, t_dot: &RigidTransform, max: bool) -> f64 {
    let mut acc = 0.0;
    let mut moved: Vec<Vec3> = Vec::new();
    for g in gp.groups() {
        moved.clear();
        moved.extend(g.iter().map(|p| t_dot.apply(p)));
        let mut inner = 0.0;
        for p in g {
            let a = t_hat.apply(p);
            let d = moved
                .iter()
                .map(|b| (a - b).norm())
                .fold(f64::INFINITY, f64::min);
            if max {
                inner = f64::max(inner, d);
            } else {
                inner += d;
            }
        }
        if max {
            acc = f64::max(acc, inner);
        } else {
            acc += inner / g.len() as f64;
        }
    }
    if max {
        acc
    } else {
        acc / gp.groups().len() as f64
    }
}

pub fn agpd(gp: &GroupedPrimitives, t_hat: &RigidTransform, t_dot: &RigidTransform) -> MetricValue {
    MetricValue {
        value: grouped(gp, t_hat, t_dot, false),
        kind: MetricKind::Agpd,
    }
}

pub fn mgpd(gp: &GroupedPrimitives, t_hat: &RigidTransform, t_dot: &RigidTransform) -> MetricValue {
    MetricValue {
        value: grouped(gp, t_hat, t_dot, true),
        kind: MetricKind::Mgpd,
    }
}

/// MGPD for category 2 (a single finite axis), AGPD for everything else.
pub fn amgpd(gp: &GroupedPrimitives, t_hat: &RigidTransform, t_dot: &RigidTransform) -> MetricValue {
    if gp.category() == Category::Cat2 {
        mgpd(gp, t_hat, t_dot)
    } else {
        agpd(gp, t_hat, t_dot)
    }
}

pub fn add(p: &PointSet, t_hat: &RigidTransform, t_dot: &RigidTransform) -> MetricValue {
    let sum: f64 = p
        .points()
        .iter()
        .map(|q| (t_hat.apply(q) - t_dot.apply(q)).norm())
        .sum();
    MetricValue {
        value: sum / p.len() as f64,
        kind: MetricKind::Add,
    }
}

/// `index` must be built over `p`. Each `T_hat p` is matched in the object frame
/// of `T_dot`, where the rigid map preserves distances.
pub fn add_s(p: &PointSet, index: &NnIndex, t_hat: &RigidTransform, t_dot: &RigidTransform) -> MetricValue {
    let rel = t_dot.inverse().compose(t_hat);
    let sum: f64 = p
        .points()
        .iter()
        .map(|q| index.nearest(&rel.apply(q)).1)
        .sum();
    MetricValue {
        value: sum / p.len() as f64,
        kind: MetricKind::AddS,
    }
}

/// Lipschitz constant of A(M)GPD in the predicted rotation (per radian).
pub fn lipschitz_bound(gp: &GroupedPrimitives) -> f64 {
    2.0 * gp.groups().iter().flatten().map(|p| p.norm()).sum::<f64>()
}

/// A pose distance ready to evaluate: grouped primitives or a model point set.
#[derive(Debug, Clone)]
pub enum PoseDistance {
    Grouped { gp: GroupedPrimitives, kind: MetricKind },
    Model { points: PointSet, index: NnIndex, kind: MetricKind },
}

impl PoseDistance {
    pub fn grouped(gp: GroupedPrimitives, kind: MetricKind) -> Result<Self> {
        if kind.needs_model() {
            return Err(Error::invalid(format!("{kind} needs model points, not grouped primitives")));
        }
        Ok(Self::Grouped { gp, kind })
    }

    pub fn model(points: PointSet, kind: MetricKind) -> Result<Self> {
        if !kind.needs_model() {
            return Err(Error::invalid(format!("{kind} needs grouped primitives")));
        }
        let index = crate::geom::build_nn_index(&points);
        Ok(Self::Model { points, index, kind })
    }

    /// The requested kind (`amgpd` stays `amgpd`).
    pub fn kind(&self) -> MetricKind {
        match self {
            Self::Grouped { kind, .. } | Self::Model { kind, .. } => *kind,
        }
    }

    pub fn eval(&self, t_hat: &RigidTransform, t_dot: &RigidTransform) -> f64 {
        match self {
            Self::Grouped { gp, kind } => match kind.resolve(gp.category()) {
                MetricKind::Mgpd => grouped(gp, t_hat, t_dot, true),
                _ => grouped(gp, t_hat, t_dot, false),
            },
            Self::Model { points, index, kind } => match kind {
                MetricKind::Add => add(points, t_hat, t_dot).value,
                _ => add_s(points, index, t_hat, t_dot).value,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucCurve {
    pub thresholds: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub area: f64,
}

/// Accuracy at threshold `t` counts distances `<= t`, so a perfect estimator scores
/// exactly 1. The area is the trapezoidal integral over `[0, max_threshold]`,
/// divided by `max_threshold`.
pub fn auc(distances: &[f64], max_threshold: f64) -> Result<AucCurve> {
    if distances.is_empty() {
        return Err(Error::invalid("AUC needs at least one distance"));
    }
    if !(max_threshold.is_finite() && max_threshold > 0.0) {
        return Err(Error::invalid("AUC threshold must be positive"));
    }
    if distances.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::invalid("distances must be non-negative"));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let thresholds: Vec<f64> = (0..AUC_GRID)
        .map(|k| max_threshold * k as f64 / (AUC_GRID - 1) as f64)
        .collect();
    let accuracy: Vec<f64> = thresholds
        .iter()
        .map(|t| sorted.partition_point(|d| d <= t) as f64 / n)
        .collect();
    // The grid is even, so the normalized area is the mean trapezoid height.
    let heights: f64 = accuracy.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
    Ok(AucCurve {
        thresholds,
        accuracy,
        area: heights / (AUC_GRID - 1) as f64,
    })
}
