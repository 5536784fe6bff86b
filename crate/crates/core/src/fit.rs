//! Numerical pose descent under a chosen distance, to compare how the grouped
//! distances and ADD-S behave as training losses.
//!
//! The pose is moved on the chart `(omega, dt) -> (exp(omega) R, t + dt)` around the
//! current estimate. Each iteration takes a central-difference gradient, a BFGS
//! direction and an Armijo backtracking step. When that stalls on a kink, the step
//! follows the shortest vector in the hull of gradients sampled nearby, and a
//! compass search along the chart axes is the last resort.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::{Matrix6, Vector6};

use crate::geom::{normalize_point_set, RigidTransform, RotationMatrix, RotationVector, Vec3};
use crate::gp::build_gp;
use crate::metrics::{MetricKind, PoseDistance};
use crate::report::RunHeader;
use crate::shape::{generate_shape, resample_surface, ShapeSpec};
use crate::symmetry::{detect, random_rotation, DetectorConfig, SymmetryGroup};
use crate::{Error, Result};

/// Rotation offset (radians) at which the chart is re-centred.
const RECENTER: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Central-difference step on the chart.
    pub gradient_step: f64,
    /// Stop when the gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Line-search and compass steps stop shrinking here.
    pub min_step: f64,
    /// Geodesic gap (degrees) below which the result counts as correct.
    pub correct_angle_deg: f64,
    /// Translation error (times the radius) below which the result counts as correct.
    pub correct_translation: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_step: 1e-4,
            gradient_tolerance: 1e-6,
            initial_step: 0.5,
            armijo: 1e-4,
            min_step: 1e-7,
            correct_angle_deg: 5.0,
            correct_translation: 0.02,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.gradient_step,
            self.initial_step,
            self.armijo,
            self.min_step,
            self.correct_angle_deg,
            self.correct_translation,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(self.gradient_tolerance >= 0.0) {
            return Err(Error::invalid("fit steps and tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub pose: RigidTransform,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub iterations: usize,
    /// Stopped on a small gradient rather than on the iteration cap or a stall.
    pub converged: bool,
    /// Geodesic gap (radians) from the relative rotation to the symmetry group.
    pub rotation_gap: f64,
    pub translation_error: f64,
    pub correct: bool,
}

fn retract(base: &RigidTransform, x: &Vector6<f64>) -> RigidTransform {
    let w = Vec3::new(x[0], x[1], x[2]);
    let r = match RotationVector::new(w) {
        Ok(v) => RotationMatrix::from_rotation_vector(&v),
        // Only reachable for steps of pi or more; wrap to the equivalent vector.
        Err(_) => RotationMatrix::about_unit_axis(&w.normalize(), w.norm()),
    };
    RigidTransform::new(
        (r * base.rotation).renormalized(),
        base.translation + Vec3::new(x[3], x[4], x[5]),
    )
}

/// Sampled gradients per nonsmooth step.
const SAMPLED_GRADIENTS: usize = 10;
/// An accepted quasi-Newton step shorter than this (times the initial step)
/// counts as a stall.
const STALL_FRACTION: f64 = 1e-3;
/// Sampling radius bounds, times the initial step.
const GS_START_RADIUS: f64 = 0.02;
const GS_MAX_RADIUS: f64 = 0.2;

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Approximate shortest vector in the convex hull of `gs`.
fn min_norm_in_hull(gs: &[Vector6<f64>]) -> Vector6<f64> {
    let m = gs.len();
    let gram: Vec<f64> = (0..m * m).map(|k| gs[k / m].dot(&gs[k % m])).collect();
    let lip = (0..m).map(|i| gram[i * m + i]).sum::<f64>().max(1e-300);
    let mut w = vec![1.0 / m as f64; m];
    for _ in 0..400 {
        let grad: Vec<f64> = (0..m).map(|i| (0..m).map(|j| gram[i * m + j] * w[j]).sum()).collect();
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= gi / lip;
        }
        project_simplex(&mut w);
    }
    gs.iter().zip(&w).map(|(g, wi)| g * *wi).sum()
}

struct Objective<'a> {
    distance: &'a PoseDistance,
    target: &'a RigidTransform,
}

impl Objective<'_> {
    fn at(&self, pose: &RigidTransform) -> f64 {
        self.distance.eval(pose, self.target)
    }

    fn chart(&self, base: &RigidTransform, x: &Vector6<f64>) -> f64 {
        self.at(&retract(base, x))
    }

    fn gradient_at(&self, base: &RigidTransform, x: &Vector6<f64>, h: f64) -> Vector6<f64> {
        Vector6::from_fn(|i, _| {
            let mut e = Vector6::zeros();
            e[i] = h;
            (self.chart(base, &(x + e)) - self.chart(base, &(x - e))) / (2.0 * h)
        })
    }
}

/// Central-difference gradient of the loss at `pose` on the local chart.
pub fn numerical_gradient(distance: &PoseDistance, target: &RigidTransform, pose: &RigidTransform, h: f64) -> [f64; 6] {
    let g = Objective { distance, target }.gradient_at(pose, &Vector6::zeros(), h);
    std::array::from_fn(|i| g[i])
}

/// Descends `distance(pose, target)` from `initial`. Correctness is judged against
/// `group`, the proper symmetries of the object, with translations scaled by `radius`.
pub fn fit_pose(
    distance: &PoseDistance,
    target: &RigidTransform,
    initial: &RigidTransform,
    group: &SymmetryGroup,
    radius: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let f = Objective { distance, target };
    let initial_loss = f.at(initial);
    // Quasi-Newton on a chart centred at `base`; the chart is re-centred (and the
    // curvature estimate reset) before the rotation offset gets large. Where the
    // loss is a max of smooth pieces, BFGS crawls along the ridge between them;
    // those stretches switch to gradient sampling.
    let mut base = *initial;
    let mut x = Vector6::zeros();
    let mut loss = initial_loss;
    let mut h_inv = Matrix6::identity();
    let mut g = f.gradient_at(&base, &x, cfg.gradient_step);
    let mut compass = cfg.initial_step * 0.1;
    let mut sampling = false;
    let mut radius_gs = GS_START_RADIUS * cfg.initial_step;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        if loss == 0.0 || (!sampling && g.norm() < cfg.gradient_tolerance) {
            converged = true;
            break;
        }
        iterations += 1;
        if x.fixed_rows::<3>(0).norm() > RECENTER {
            base = retract(&base, &x);
            x = Vector6::zeros();
            h_inv = Matrix6::identity();
            g = f.gradient_at(&base, &x, cfg.gradient_step);
        }

        let dir = if sampling {
            let mut gs = vec![g];
            for _ in 0..SAMPLED_GRADIENTS {
                let u = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0) * radius_gs);
                gs.push(f.gradient_at(&base, &(x + u), cfg.gradient_step));
            }
            let d = -min_norm_in_hull(&gs);
            if d.norm() < cfg.gradient_tolerance {
                // Stationary at this sampling scale: look closer.
                radius_gs *= 0.1;
                if radius_gs < cfg.min_step {
                    converged = true;
                    break;
                }
                continue;
            }
            d
        } else {
            let d = -(h_inv * g);
            if d.dot(&g) >= 0.0 {
                h_inv = Matrix6::identity();
                -g
            } else {
                d
            }
        };
        // Cap the step so one iteration never turns the pose by more than the
        // initial step.
        let mut a = (cfg.initial_step / dir.norm().max(1e-300)).min(1.0);
        let slope = if sampling { -dir.norm_squared() } else { dir.dot(&g) };
        let mut accepted = None;
        while a * dir.norm() >= cfg.min_step {
            let trial_x = x + dir * a;
            let v = f.chart(&base, &trial_x);
            if v <= loss + cfg.armijo * a * slope && v < loss {
                accepted = Some((trial_x, v));
                break;
            }
            a *= 0.5;
        }
        if let Some((nx, v)) = accepted {
            let ng = f.gradient_at(&base, &nx, cfg.gradient_step);
            let s = nx - x;
            if sampling {
                // Stay on the ridge; widen the sample while steps keep working.
                radius_gs = (radius_gs * 2.0).min(GS_MAX_RADIUS * cfg.initial_step);
                if ng.dot(&g) > 0.0 && s.norm() > 0.5 * cfg.initial_step {
                    sampling = false;
                }
                h_inv = Matrix6::identity();
            } else if ng.dot(&g) < 0.0 || s.norm() < STALL_FRACTION * cfg.initial_step {
                sampling = true;
                h_inv = Matrix6::identity();
            } else {
                let y = ng - g;
                let sy = s.dot(&y);
                if sy > 1e-12 * s.norm() * y.norm() {
                    let rho = 1.0 / sy;
                    let i = Matrix6::identity();
                    h_inv = (i - s * y.transpose() * rho) * h_inv * (i - y * s.transpose() * rho)
                        + s * s.transpose() * rho;
                }
            }
            x = nx;
            g = ng;
            loss = v;
            continue;
        }
        if !sampling {
            sampling = true;
            continue;
        }
        radius_gs *= 0.5;
        if radius_gs >= cfg.min_step {
            continue;
        }

        // Compass search as the last resort.
        let mut moved = false;
        while !moved && compass >= cfg.min_step {
            for i in 0..12 {
                let mut step = Vector6::zeros();
                step[i / 2] = if i % 2 == 0 { compass } else { -compass };
                let v = f.chart(&base, &(x + step));
                if v < loss {
                    x += step;
                    loss = v;
                    moved = true;
                    break;
                }
            }
            if !moved {
                compass *= 0.5;
            }
        }
        if !moved {
            break;
        }
        sampling = false;
        radius_gs = GS_START_RADIUS * cfg.initial_step;
        h_inv = Matrix6::identity();
        g = f.gradient_at(&base, &x, cfg.gradient_step);
    }
    let pose = retract(&base, &x);

    let relative = target.rotation.transpose() * pose.rotation;
    let rotation_gap = group.gap(&relative);
    let translation_error = (pose.translation - target.translation).norm();
    Ok(FitResult {
        pose,
        initial_loss,
        final_loss: loss,
        iterations,
        converged,
        rotation_gap,
        translation_error,
        correct: rotation_gap < cfg.correct_angle_deg.to_radians()
            && translation_error < cfg.correct_translation * radius,
    })
}

/// An object ready for fitting: its grouped primitives, a model sample for the
/// point-based losses, and its proper-symmetry group.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub name: String,
    pub spec: Option<ShapeSpec>,
    pub gp: crate::gp::GroupedPrimitives,
    pub model: crate::geom::PointSet,
    pub group: SymmetryGroup,
}

/// Model points kept for ADD / ADD-S losses.
pub const FIT_MODEL_POINTS: usize = 300;

impl FitProblem {
    /// Generates, normalizes and analyses a toy shape.
    pub fn from_shape(spec: &ShapeSpec, seed: u64) -> Result<Self> {
        let p = generate_shape(spec, seed)?;
        let sym = detect(&p, &DetectorConfig::default())?;
        let gp = build_gp(&sym, 1.0)?;
        let model = resample_surface(&normalize_point_set(&p).points, FIT_MODEL_POINTS)?;
        Ok(Self {
            name: spec.to_string(),
            spec: Some(spec.clone()),
            group: gp.symmetry_group().clone(),
            gp,
            model,
        })
    }

    pub fn distance(&self, kind: MetricKind) -> Result<PoseDistance> {
        if kind.needs_model() {
            PoseDistance::model(self.model.clone(), kind)
        } else {
            PoseDistance::grouped(self.gp.clone(), kind)
        }
    }
}

/// How initial poses are drawn relative to the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum InitMode {
    /// Uniformly random rotation offset.
    Uniform,
    /// Within `max_angle_deg` of `target * center`.
    Near { center: RotationMatrix, max_angle_deg: f64 },
}

/// Largest initial translation offset, times the radius.
const INIT_TRANSLATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub shape: String,
    pub loss: MetricKind,
    pub trial: usize,
    pub correct: bool,
    pub gap_deg: f64,
    pub translation_error: f64,
    pub iterations: usize,
    pub final_loss: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// Target and initial pose for one trial; identical across losses.
pub fn trial_poses(seed: u64, trial: usize, init: &InitMode) -> (RigidTransform, RigidTransform) {
    let mut rng = trial_rng(seed, trial);
    let target = RigidTransform::new(
        random_rotation(&mut rng),
        Vec3::from_fn(|_, _| rng.gen_range(-0.5..0.5)),
    );
    let offset = match init {
        InitMode::Uniform => random_rotation(&mut rng),
        InitMode::Near { center, max_angle_deg } => {
            let axis = crate::geom::Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let axis = if axis.norm() > 1e-9 { axis.normalize() } else { Vec3::z() };
            let angle = rng.gen_range(0.0..=max_angle_deg.to_radians());
            *center * RotationMatrix::about_unit_axis(&axis, angle)
        }
    };
    let shift = Vec3::from_fn(|_, _| rng.gen_range(-INIT_TRANSLATION..INIT_TRANSLATION));
    let initial = RigidTransform::new(target.rotation * offset, target.translation + shift);
    (target, initial)
}

/// Runs `trials` seeded fits for every (problem, loss) pair, rows ordered by
/// problem, loss, then trial.
pub fn batch_fit(
    problems: &[FitProblem],
    losses: &[MetricKind],
    trials: usize,
    seed: u64,
    init: &InitMode,
    cfg: &FitConfig,
) -> Result<Vec<TrialResult>> {
    let mut out = Vec::with_capacity(problems.len() * losses.len() * trials);
    for p in problems {
        for &loss in losses {
            let d = p.distance(loss)?;
            let rows: Result<Vec<TrialResult>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let (target, initial) = trial_poses(seed, t, init);
                    let r = fit_pose(&d, &target, &initial, &p.group, p.gp.radius(), cfg)?;
                    Ok(TrialResult {
                        shape: p.name.clone(),
                        loss,
                        trial: t,
                        correct: r.correct,
                        gap_deg: r.rotation_gap.to_degrees(),
                        translation_error: r.translation_error,
                        iterations: r.iterations,
                        final_loss: r.final_loss,
                    })
                })
                .collect();
            out.extend(rows?);
        }
    }
    Ok(out)
}

/// Fraction of correct trials per (shape, loss), in first-appearance order.
pub fn success_rates(rows: &[TrialResult]) -> Vec<(String, MetricKind, f64)> {
    let mut out: Vec<(String, MetricKind, usize, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(s, l, _, _)| *s == r.shape && *l == r.loss) {
            Some(e) => {
                e.2 += r.correct as usize;
                e.3 += 1;
            }
            None => out.push((r.shape.clone(), r.loss, r.correct as usize, 1)),
        }
    }
    out.into_iter()
        .map(|(s, l, c, n)| (s, l, c as f64 / n as f64))
        .collect()
}

pub fn results_csv(rows: &[TrialResult], header: &RunHeader) -> String {
    let mut out = header.comment_lines();
    out.push_str("shape,loss,trial,correct,gap_deg,translation_error,iterations,final_loss\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.shape, r.loss, r.trial, r.correct, r.gap_deg, r.translation_error, r.iterations, r.final_loss
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::build_gp_from_axes;
    use crate::symmetry::AxisAngle;

    fn pyramid() -> (PoseDistance, SymmetryGroup) {
        let gp = build_gp_from_axes(&[AxisAngle::new(Vec3::z(), 4).unwrap()], 1.0).unwrap();
        let g = gp.symmetry_group().clone();
        (PoseDistance::grouped(gp, MetricKind::Mgpd).unwrap(), g)
    }

    #[test]
    fn start_at_target_needs_no_iterations() {
        let (d, g) = pyramid();
        let t = RigidTransform::new(RotationMatrix::about_unit_axis(&Vec3::x(), 0.4), Vec3::new(0.1, 0.0, 0.2));
        let r = fit_pose(&d, &t, &t, &g, 1.0, &FitConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.correct && r.converged);
    }

    #[test]
    fn loss_never_increases_and_fits_recover() {
        let (d, g) = pyramid();
        let cfg = FitConfig::default();
        let mut correct = 0;
        for t in 0..20 {
            let (target, init) = trial_poses(11, t, &InitMode::Uniform);
            let r = fit_pose(&d, &target, &init, &g, 1.0, &cfg).unwrap();
            assert!(r.final_loss <= r.initial_loss);
            correct += r.correct as usize;
        }
        assert!(correct >= 18, "{correct}/20");
    }

    #[test]
    fn gradient_is_step_consistent() {
        let (d, _) = pyramid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let target = RigidTransform::identity();
            let pose = RigidTransform::new(random_rotation(&mut rng), Vec3::new(0.05, -0.02, 0.01));
            let a = numerical_gradient(&d, &target, &pose, 1e-4);
            let b = numerical_gradient(&d, &target, &pose, 5e-5);
            let (a, b) = (Vector6::from(a), Vector6::from(b));
            assert!((a - b).norm() <= 0.05 * b.norm(), "{a:?} {b:?}");
        }
    }

    #[test]
    fn trial_poses_are_deterministic_and_near_mode_is_bounded() {
        let flip = RotationMatrix::about_unit_axis(&Vec3::x(), std::f64::consts::PI);
        let init = InitMode::Near { center: flip, max_angle_deg: 30.0 };
        let (t1, i1) = trial_poses(3, 7, &init);
        assert_eq!((t1, i1), trial_poses(3, 7, &init));
        let off = t1.rotation.transpose() * i1.rotation;
        assert!(crate::geom::geodesic_distance(&off, &flip) <= 30f64.to_radians() + 1e-9);
        assert_ne!(trial_poses(3, 8, &init).0, t1);
    }
}
