use crate::geom::{PointSet, Vec3};
use crate::{Error, Result};

/// Farthest-point subsample of `count` points, starting from the first point.
///
/// Ties go to the lowest index, so the result is deterministic. A `count` at or
/// above the set size returns the set unchanged.
pub fn resample_surface(p: &PointSet, count: usize) -> Result<PointSet> {
    if count < 4 {
        return Err(Error::invalid("resample count must be at least 4"));
    }
    let pts = p.points();
    if count >= pts.len() {
        return Ok(p.clone());
    }
    let mut chosen: Vec<Vec3> = Vec::with_capacity(count);
    let mut gap = vec![f64::INFINITY; pts.len()];
    let mut next = 0;
    for _ in 0..count {
        let c = pts[next];
        chosen.push(c);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, q) in pts.iter().enumerate() {
            let d = (q - c).norm_squared();
            if d < gap[i] {
                gap[i] = d;
            }
            if gap[i] > best.1 {
                best = (i, gap[i]);
            }
        }
        next = best.0;
    }
    PointSet::new(chosen)
}
