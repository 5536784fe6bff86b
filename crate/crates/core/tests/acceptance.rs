//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symgp::fit::{batch_fit, FitConfig, FitProblem, InitMode};
use symgp::geom::{
    build_nn_index, normalize_point_set, PointSet, RigidTransform, RotationMatrix, Vec3,
};
use symgp::gp::{build_gp, GroupedPrimitives};
use symgp::landscape::{build_landscape, descend_to_minima, slice_1d, MinimaReport};
use symgp::metrics::{lipschitz_bound, MetricKind, PoseDistance};
use symgp::shape::{generate_shape, resample_surface, ShapeSpec};
use symgp::symmetry::{detect, random_rotation, DetectorConfig, SymmetryGroup, SymmetrySet};

const SHAPE_SEED: u64 = 0;
const AXIS_TOL_DEG: f64 = 1.0;
const DETECT_BUDGET: Duration = Duration::from_secs(60);
const HAUSDORFF_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-6;
const SEPARATION: f64 = 0.05;
const LANDSCAPE_N: usize = 50_000;
const LANDSCAPE_K: usize = 48;
const LANDSCAPE_SEED: u64 = 1;
const LANDSCAPE_BUDGET: Duration = Duration::from_secs(300);
const FIT_TRIALS: usize = 100;
const FIT_SEED: u64 = 0;
const ORACLE_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 9] = [
        ("detection", detection),
        ("hausdorff", hausdorff_index),
        ("zero-set", zero_set),
        ("landscape", landscape),
        ("clamp", clamp_landscape),
        ("pyramid slice", pyramid_slice),
        ("fitting", fitting),
        ("metric oracle", metric_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "criterion {} {verdict} [{name}] {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos()
}

fn detected(spec: &ShapeSpec) -> (PointSet, SymmetrySet) {
    let p = generate_shape(spec, SHAPE_SEED).expect("shape");
    let sym = detect(&p, &DetectorConfig::default()).expect("detect");
    (p, sym)
}

fn gp_for(spec: &ShapeSpec) -> GroupedPrimitives {
    let (_, sym) = detected(spec);
    build_gp(&sym, sym.radius).expect("gp")
}

fn all_shapes() -> Vec<ShapeSpec> {
    let mut v = vec![ShapeSpec::cube()];
    v.extend((3..=6).map(ShapeSpec::pyramid));
    v.extend([
        ShapeSpec::cone(),
        ShapeSpec::cylinder(),
        ShapeSpec::sphere(),
        ShapeSpec::clamp(),
        ShapeSpec::frame(),
    ]);
    v
}

fn detection() -> Outcome {
    let tol = AXIS_TOL_DEG.to_radians();
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for spec in all_shapes() {
        let p = generate_shape(&spec, SHAPE_SEED).expect("shape");
        let start = Instant::now();
        let sym = detect(&p, &DetectorConfig::default()).expect("detect");
        let took = start.elapsed();
        slowest = slowest.max(took);
        let nominal = spec.nominal_symmetry();
        let geo = sym.geometric_axes();
        let mut ok = sym.category == nominal.category && took < DETECT_BUDGET;
        let sphere = nominal.category == symgp::symmetry::Category::Cat5;
        if ok && !sphere {
            let continuous: Vec<_> = geo.iter().filter(|a| a.is_continuous()).collect();
            let finite: Vec<_> = geo.iter().filter(|a| !a.is_continuous()).collect();
            ok &= continuous.len() == nominal.continuous.len();
            for e in &nominal.continuous {
                ok &= continuous.iter().any(|a| line_angle(&a.axis(), e) < tol);
            }
            if nominal.perpendicular_twofold {
                let e = nominal.continuous[0];
                ok &= finite
                    .iter()
                    .all(|a| a.order() == 2 && (a.axis().dot(&e)).abs() < tol.sin());
            } else {
                ok &= finite.len() == nominal.finite.len();
                for (e, n) in &nominal.finite {
                    ok &= finite
                        .iter()
                        .any(|a| a.order() == *n && line_angle(&a.axis(), e) < tol);
                }
            }
        }
        if !ok {
            bad.push(format!("{spec}: {} {} axes", sym.category.as_str(), geo.len()));
        }
    }
    let detail = format!("11 shapes, slowest {:.1}s", slowest.as_secs_f64());
    if bad.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; wrong: {}", bad.join(", ")))
    }
}

fn brute_directed(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointSet {
    let scale = rng.gen_range(0.1..10.0);
    PointSet::new(
        (0..n)
            .map(|_| Vec3::from_fn(|_, _| rng.gen_range(-scale..scale)))
            .collect(),
    )
    .unwrap()
}

fn hausdorff_index() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shapes = all_shapes();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        // Alternate between random clouds and perturbed copies of toy shapes.
        let (a, b) = if i % 2 == 0 {
            let na = rng.gen_range(1..=2000);
            let nb = rng.gen_range(1..=2000);
            (random_cloud(&mut rng, na), random_cloud(&mut rng, nb))
        } else {
            let spec = shapes[rng.gen_range(0..shapes.len())]
                .clone()
                .with_samples(rng.gen_range(200..=2000));
            let a = generate_shape(&spec, rng.gen()).unwrap();
            let b = if rng.gen_bool(0.5) {
                generate_shape(&spec, rng.gen()).unwrap()
            } else {
                a.rotated(&random_rotation(&mut rng))
            };
            (a, b)
        };
        let fast = symgp::geom::hausdorff_distance(&a, &build_nn_index(&a), &b, &build_nn_index(&b)).unwrap();
        let slow = brute_directed(a.points(), b.points()).max(brute_directed(b.points(), a.points()));
        worst = worst.max((fast - slow).abs());
    }
    outcome(worst <= HAUSDORFF_TOL, format!("50 pairs, max |indexed - brute| = {worst:.2e}"))
}

fn random_pose(rng: &mut ChaCha8Rng) -> RigidTransform {
    RigidTransform::new(random_rotation(rng), Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)))
}

fn zero_set() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let specs = [
        ShapeSpec::cube(),
        ShapeSpec::pyramid(3),
        ShapeSpec::pyramid(4),
        ShapeSpec::pyramid(5),
        ShapeSpec::pyramid(6),
        ShapeSpec::cone(),
        ShapeSpec::cylinder(),
        ShapeSpec::clamp(),
    ];
    let mut max_zero: f64 = 0.0;
    let mut min_sep = f64::INFINITY;
    for spec in &specs {
        let gp = gp_for(spec);
        let r = gp.radius();
        let d = PoseDistance::grouped(gp.clone(), MetricKind::Amgpd).unwrap();
        let group = gp.symmetry_group();
        let mut elements: Vec<RotationMatrix> = gp.generators().to_vec();
        for _ in 0..50 {
            let len = rng.gen_range(1..=8);
            let gens = gp.generators();
            let w = (0..len).fold(RotationMatrix::identity(), |acc, _| {
                let g = if gens.is_empty() || rng.gen_bool(0.3) {
                    group.random_element(&mut rng)
                } else {
                    gens[rng.gen_range(0..gens.len())]
                };
                acc * g
            });
            elements.push(w);
        }
        for s in &elements {
            let t = random_pose(&mut rng);
            let ts = t.compose(&RigidTransform::from_rotation(*s));
            max_zero = max_zero.max(d.eval(&t, &ts) / r);
        }
        let mut tested = 0;
        while tested < 200 {
            let q = random_rotation(&mut rng);
            if group.gap(&q) < 10f64.to_radians() {
                continue;
            }
            tested += 1;
            let t = random_pose(&mut rng);
            let tq = t.compose(&RigidTransform::from_rotation(q));
            min_sep = min_sep.min(d.eval(&t, &tq) / r);
        }
    }
    outcome(
        max_zero < ZERO_TOL && min_sep > SEPARATION,
        format!("{} shapes, max d/r on S = {max_zero:.1e}, min d/r off S = {min_sep:.3}", specs.len()),
    )
}

fn landscape_report(d: &PoseDistance, group: &SymmetryGroup) -> (MinimaReport, Duration) {
    let start = Instant::now();
    let land = build_landscape(d, LANDSCAPE_N, LANDSCAPE_K, LANDSCAPE_SEED).expect("landscape");
    let report = descend_to_minima(&land, group);
    (report, start.elapsed())
}

fn landscape() -> Outcome {
    let specs = [
        ShapeSpec::cube(),
        ShapeSpec::pyramid(4),
        ShapeSpec::cone(),
        ShapeSpec::cylinder(),
        ShapeSpec::sphere(),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in &specs {
        let gp = gp_for(spec);
        let kind = MetricKind::Amgpd.resolve(gp.category());
        let group = gp.symmetry_group().clone();
        let d = PoseDistance::grouped(gp, kind).unwrap();
        let (rep, took) = landscape_report(&d, &group);
        let worst = rep.minima.iter().map(|m| m.nearest_sym_gap).fold(0.0, f64::max);
        let good = rep.all_correct && worst < 2.0 * rep.max_gap && took < LANDSCAPE_BUDGET;
        ok &= good;
        parts.push(format!(
            "{spec}/{kind}: {} minima, worst gap {:.2} deg vs 2x max_gap {:.2} deg, {:.0}s{}",
            rep.minima.len(),
            worst.to_degrees(),
            2.0 * rep.max_gap.to_degrees(),
            took.as_secs_f64(),
            if good { "" } else { " <-" }
        ));
    }
    outcome(ok, parts.join("; "))
}

fn clamp_landscape() -> Outcome {
    let spec = ShapeSpec::clamp();
    let (p, sym) = detected(&spec);
    let gp = build_gp(&sym, sym.radius).unwrap();
    let group = gp.symmetry_group().clone();
    let model = resample_surface(&normalize_point_set(&p).points, 300).unwrap();
    let adds = PoseDistance::model(model, MetricKind::AddS).unwrap();
    let (rep_s, _) = landscape_report(&adds, &group);
    let spurious = rep_s.minima.iter().map(|m| m.nearest_sym_gap).fold(0.0, f64::max);
    let mgpd = PoseDistance::grouped(gp, MetricKind::Mgpd).unwrap();
    let (rep_m, _) = landscape_report(&mgpd, &group);
    outcome(
        spurious > 20f64.to_radians() && rep_m.all_correct,
        format!(
            "ADD-S worst minimum gap {:.1} deg; MGPD {} minima, all_correct = {}",
            spurious.to_degrees(),
            rep_m.minima.len(),
            rep_m.all_correct
        ),
    )
}

fn pyramid_slice() -> Outcome {
    let gp = gp_for(&ShapeSpec::pyramid(4));
    let r = gp.radius();
    let lip = lipschitz_bound(&gp);
    let axis = {
        let v = gp.generators()[0].to_rotation_vector();
        v.vector() / v.angle()
    };
    let d = PoseDistance::grouped(gp, MetricKind::Mgpd).unwrap();
    let steps = 360;
    let s = slice_1d(&d, &axis, steps).unwrap();
    let step = 2.0 * PI / steps as f64;
    let zero = [0, 90, 180, 270].iter().map(|&i| s[i].d).fold(0.0, f64::max);
    let mid = [45, 135, 225, 315].iter().map(|&i| s[i].d).fold(f64::INFINITY, f64::min);
    let jump = (0..steps)
        .map(|i| (s[(i + 1) % steps].d - s[i].d).abs())
        .fold(0.0, f64::max);
    outcome(
        zero < ZERO_TOL * r && mid > SEPARATION * r && jump < lip * step,
        format!(
            "max d at quarter turns {zero:.1e}, min d at offsets {mid:.3}, max jump {jump:.4} < {:.4}",
            lip * step
        ),
    )
}

fn fitting() -> Outcome {
    let cfg = FitConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in [
        ShapeSpec::pyramid(4),
        ShapeSpec::cone(),
        ShapeSpec::cylinder(),
        ShapeSpec::cube(),
    ] {
        let prob = FitProblem::from_shape(&spec, SHAPE_SEED).unwrap();
        let rows = batch_fit(&[prob], &[MetricKind::Amgpd], FIT_TRIALS, FIT_SEED, &InitMode::Uniform, &cfg).unwrap();
        let rate = rows.iter().filter(|r| r.correct).count() as f64 / rows.len() as f64;
        ok &= rate >= 0.95;
        parts.push(format!("{spec} {:.0}%", 100.0 * rate));
    }
    let clamp = ShapeSpec::clamp();
    let init = InitMode::Near {
        center: clamp.spurious_flip().unwrap(),
        max_angle_deg: 30.0,
    };
    let prob = FitProblem::from_shape(&clamp, SHAPE_SEED).unwrap();
    let rows = batch_fit(
        &[prob],
        &[MetricKind::AddS, MetricKind::Amgpd],
        FIT_TRIALS,
        FIT_SEED,
        &init,
        &cfg,
    )
    .unwrap();
    let wrong = |k: MetricKind| {
        let of: Vec<_> = rows.iter().filter(|r| r.loss == k).collect();
        of.iter().filter(|r| !r.correct).count() as f64 / of.len() as f64
    };
    let (ws, wa) = (wrong(MetricKind::AddS), wrong(MetricKind::Amgpd));
    ok &= ws >= 0.10 && wa == 0.0;
    parts.push(format!(
        "clamp from flip: ADD-S wrong {:.0}%, A(M)GPD wrong {:.0}%",
        100.0 * ws,
        100.0 * wa
    ));
    outcome(ok, format!("A(M)GPD correct: {}", parts.join(", ")))
}

/// Nearest-point distance of `p` to its own orbit, evaluated per group element for
/// finite groups and against the listed group members (in the relative frame)
/// otherwise.
fn oracle(gp: &GroupedPrimitives, t_hat: &RigidTransform, t_dot: &RigidTransform) -> (f64, f64) {
    let rel = t_dot.inverse().compose(t_hat);
    let mut per_group = Vec::new();
    for g in gp.groups() {
        let d: Vec<f64> = g
            .iter()
            .map(|p| match gp.symmetry_group() {
                SymmetryGroup::Finite(elems) => elems
                    .iter()
                    .map(|s| (t_hat.apply(p) - t_dot.apply(&s.apply(p))).norm())
                    .fold(f64::INFINITY, f64::min),
                _ => g
                    .iter()
                    .map(|q| (rel.apply(p) - q).norm())
                    .fold(f64::INFINITY, f64::min),
            })
            .collect();
        per_group.push(d);
    }
    let mean = per_group
        .iter()
        .map(|d| d.iter().sum::<f64>() / d.len() as f64)
        .sum::<f64>()
        / per_group.len() as f64;
    let max = per_group.iter().flatten().copied().fold(0.0, f64::max);
    (mean, max)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let gps: Vec<GroupedPrimitives> = [
        ShapeSpec::cube(),
        ShapeSpec::pyramid(3),
        ShapeSpec::pyramid(6),
        ShapeSpec::cone(),
        ShapeSpec::cylinder(),
        ShapeSpec::clamp(),
    ]
    .iter()
    .map(gp_for)
    .collect();
    let rel_err = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let gp = &gps[i % gps.len()];
        let t_hat = random_pose(&mut rng);
        // Some cases sit exactly on the symmetry set.
        let t_dot = if i % 10 == 0 {
            t_hat.compose(&RigidTransform::from_rotation(gp.symmetry_group().random_element(&mut rng)))
        } else {
            random_pose(&mut rng)
        };
        let (mean, max) = oracle(gp, &t_hat, &t_dot);
        let a = symgp::metrics::agpd(gp, &t_hat, &t_dot).value;
        let m = symgp::metrics::mgpd(gp, &t_hat, &t_dot).value;
        if i % 10 == 0 {
            // Zero up to rounding; compare absolutely at the radius scale.
            worst = worst.max((a - mean).abs().max((m - max).abs()) / gp.radius() / 1e3);
        } else {
            worst = worst.max(rel_err(a, mean)).max(rel_err(m, max));
        }
    }
    outcome(worst <= ORACLE_TOL, format!("1000 cases, max relative error {worst:.1e}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| symgp::cli::main_with_args(std::iter::once("symgp").chain(args.iter().copied()));
    let mut ok = true;
    let mut parts = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let code = run(&[
            "validate",
            "--shape",
            "pyramid:4",
            "--metric",
            "mgpd",
            "-N",
            "5000",
            "--seed",
            "11",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        ok &= code == 0;
    }
    for f in ["landscape.csv", "minima.json"] {
        let same = std::fs::read(dir.path().join("a").join(f)).unwrap()
            == std::fs::read(dir.path().join("b").join(f)).unwrap();
        ok &= same;
        parts.push(format!("{f} identical: {same}"));
    }
    let mut fits = Vec::new();
    for tag in ["fa.csv", "fb.csv"] {
        let out = dir.path().join(tag);
        let code = run(&[
            "fit",
            "--shape",
            "clamp",
            "--loss",
            "adds,amgpd",
            "--trials",
            "5",
            "--seed",
            "11",
            "--init",
            "flip",
            "--out",
            out.to_str().unwrap(),
        ]);
        ok &= code == 0;
        fits.push(std::fs::read(out).unwrap());
    }
    let same = fits[0] == fits[1];
    ok &= same;
    parts.push(format!("fit csv identical: {same}"));
    outcome(ok, parts.join(", "))
}
