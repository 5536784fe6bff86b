use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{line_angle, Normalization, Vec3};
use crate::{Error, Result};

/// Of `e` and `-e`, the one whose first clearly nonzero component is positive.
///
/// Detected axes carry small numerical noise, so near-zero components are skipped.
pub(crate) fn axis_sign(e: Vec3) -> Vec3 {
    for c in e.iter() {
        if c.abs() > 1e-6 {
            return if *c > 0.0 { e } else { -e };
        }
    }
    e
}

/// A symmetry axis-angle `(e, 2*pi/order)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAxisAngle", into = "RawAxisAngle")]
pub struct AxisAngle {
    axis: Vec3,
    order: u32,
    continuous: bool,
}

#[derive(Serialize, Deserialize)]
struct RawAxisAngle {
    axis: [f64; 3],
    order: u32,
    #[serde(default)]
    continuous: bool,
}

impl TryFrom<RawAxisAngle> for AxisAngle {
    type Error = Error;

    fn try_from(r: RawAxisAngle) -> Result<Self> {
        let mut a = AxisAngle::new(Vec3::from(r.axis), r.order)?;
        a.continuous = r.continuous;
        Ok(a)
    }
}

impl From<AxisAngle> for RawAxisAngle {
    fn from(a: AxisAngle) -> Self {
        RawAxisAngle {
            axis: a.axis.into(),
            order: a.order,
            continuous: a.continuous,
        }
    }
}

impl AxisAngle {
    /// `axis` is normalized; `order` must be at least 2.
    pub fn new(axis: Vec3, order: u32) -> Result<Self> {
        let n = axis.norm();
        if !(n.is_finite() && n > 1e-12) {
            return Err(Error::invalid("symmetry axis must be a non-zero finite vector"));
        }
        if order < 2 {
            return Err(Error::invalid("symmetry order must be at least 2"));
        }
        Ok(Self {
            axis: axis / n,
            order,
            continuous: false,
        })
    }

    pub(crate) fn with_continuous(mut self, continuous: bool) -> Self {
        self.continuous = continuous;
        self
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        TAU / self.order as f64
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn negated(&self) -> Self {
        Self {
            axis: -self.axis,
            ..*self
        }
    }

    /// The `+e` / `-e` pair, canonical sign first.
    pub(crate) fn pair(axis: Vec3, order: u32, continuous: bool) -> Result<[Self; 2]> {
        let a = Self::new(axis_sign(axis), order)?.with_continuous(continuous);
        Ok([a, a.negated()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Asymmetric,
    Cat1,
    Cat2,
    Cat3,
    Cat4,
    Cat5,
}

impl Category {
    /// Decision table over continuous and finite geometric axis counts.
    pub fn from_counts(continuous: usize, finite: usize) -> Self {
        match (continuous, finite) {
            (0, 0) => Self::Asymmetric,
            (0, 1) => Self::Cat2,
            (0, _) => Self::Cat1,
            (1, 0) => Self::Cat3,
            (1, _) => Self::Cat4,
            _ => Self::Cat5,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Asymmetric => "asymmetric",
            Self::Cat1 => "cat1",
            Self::Cat2 => "cat2",
            Self::Cat3 => "cat3",
            Self::Cat4 => "cat4",
            Self::Cat5 => "cat5",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "asymmetric" => Self::Asymmetric,
            "cat1" => Self::Cat1,
            "cat2" => Self::Cat2,
            "cat3" => Self::Cat3,
            "cat4" => Self::Cat4,
            "cat5" => Self::Cat5,
            _ => return Err(Error::invalid(format!("unknown category `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Hausdorff tolerance as a fraction of the object radius.
    pub epsilon: f64,
    /// Orders above this are treated as continuous.
    pub rho: u32,
    /// Largest tested order.
    pub max_order: u32,
    /// Number of candidate directions over the full sphere.
    pub axis_candidates: usize,
    /// Mean-shift bandwidth in radians.
    pub bandwidth: f64,
    /// Generic angle (radians) for the continuous-axis test.
    pub generic_angle: f64,
    /// The tolerance is raised towards this multiple of the median sample spacing
    /// (at most to twice `epsilon * radius`), since a sampled surface cannot match
    /// its rotated copy more closely than its own spacing.
    pub resolution_scale: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            rho: 6,
            max_order: 9,
            axis_candidates: 1000,
            bandwidth: 0.1,
            generic_angle: 1.0,
            resolution_scale: 1.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.rho < 2 {
            return Err(Error::invalid("rho must be at least 2"));
        }
        if self.max_order < self.rho {
            return Err(Error::invalid("max order must be at least rho"));
        }
        if self.axis_candidates < 20 {
            return Err(Error::invalid("need at least 20 axis candidates"));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !(self.generic_angle > 0.0 && self.generic_angle < std::f64::consts::PI) {
            return Err(Error::invalid("generic angle must lie in (0, pi)"));
        }
        if !(self.resolution_scale.is_finite() && self.resolution_scale >= 0.0) {
            return Err(Error::invalid("resolution scale must be non-negative"));
        }
        Ok(())
    }
}

/// Detected symmetry of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySet {
    /// All axis-angles in `+e`/`-e` pairs; continuous ones are flagged.
    pub axes: Vec<AxisAngle>,
    pub category: Category,
    pub config: DetectorConfig,
    /// Absolute Hausdorff tolerance used, in normalized units.
    pub tolerance: f64,
    /// Object radius in normalized units.
    pub radius: f64,
    /// Maps model coordinates to the normalized frame the axes live in.
    pub normalization: Normalization,
}

impl SymmetrySet {
    pub fn continuous(&self) -> impl Iterator<Item = &AxisAngle> {
        self.axes.iter().filter(|a| a.continuous)
    }

    pub fn finite(&self) -> impl Iterator<Item = &AxisAngle> {
        self.axes.iter().filter(|a| !a.continuous)
    }

    /// One entry per geometric axis (the canonical-sign member of each pair).
    pub fn geometric_axes(&self) -> Vec<AxisAngle> {
        let mut out: Vec<AxisAngle> = Vec::new();
        for a in &self.axes {
            if !out.iter().any(|b| line_angle(&a.axis, &b.axis) < 1e-9) {
                out.push(AxisAngle {
                    axis: axis_sign(a.axis),
                    ..*a
                });
            }
        }
        out
    }

    pub fn counts(&self) -> (usize, usize) {
        let geo = self.geometric_axes();
        let nc = geo.iter().filter(|a| a.continuous).count();
        (nc, geo.len() - nc)
    }
}

pub fn classify_category(sym: &SymmetrySet) -> Category {
    let (nc, nf) = sym.counts();
    Category::from_counts(nc, nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_table() {
        assert_eq!(Category::from_counts(0, 0), Category::Asymmetric);
        assert_eq!(Category::from_counts(0, 13), Category::Cat1);
        assert_eq!(Category::from_counts(0, 1), Category::Cat2);
        assert_eq!(Category::from_counts(1, 0), Category::Cat3);
        assert_eq!(Category::from_counts(1, 30), Category::Cat4);
        assert_eq!(Category::from_counts(2, 0), Category::Cat5);
        assert_eq!(Category::from_counts(200, 5), Category::Cat5);
    }

    #[test]
    fn axis_angle_json_round_trip() {
        let a = AxisAngle::new(Vec3::new(0.0, 0.0, 2.0), 4).unwrap();
        assert!((a.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"axis":[0.0,0.0,1.0],"order":4,"continuous":false}"#);
        assert_eq!(serde_json::from_str::<AxisAngle>(&s).unwrap(), a);
        assert!(serde_json::from_str::<AxisAngle>(r#"{"axis":[0,0,1],"order":1}"#).is_err());
    }

    #[test]
    fn config_bounds() {
        assert!(DetectorConfig::default().validate().is_ok());
        let bad = DetectorConfig {
            max_order: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = DetectorConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
