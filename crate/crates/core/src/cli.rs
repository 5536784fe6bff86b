//! The `symgp` command-line front end.
//!
//! Exit codes: 0 success, 1 spurious minima found by `validate`, 2 usage, parse or
//! I/O errors, 3 violated preconditions.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::fit::{batch_fit, results_csv, success_rates, FitConfig, FitProblem, InitMode};
use crate::geom::{normalize_point_set, PointSet, RigidTransform, RotationMatrix, Vec3};
use crate::gp::{build_gp, GroupedPrimitives};
use crate::landscape::{build_landscape, descend_to_minima, ExportMeta, DEFAULT_NEIGHBORS, DEFAULT_SAMPLES};
use crate::metrics::{auc, MetricKind, PoseDistance, DEFAULT_AUC_MAX};
use crate::report::RunHeader;
use crate::shape::{generate_shape, load_model, resample_surface, ModelFormat, ShapeSpec};
use crate::symmetry::{detect, DetectorConfig, SymmetrySet};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPURIOUS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "SYMGP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "symgp", version, about = "Rotational symmetry detection and symmetry-aware pose distances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect symmetry axes and the category of a model or toy shape.
    Detect(DetectArgs),
    /// Build grouped primitives.
    Gp(GpArgs),
    /// Score pose pairs.
    Dist(DistArgs),
    /// Sample the rotation landscape and check every local minimum.
    Validate(ValidateArgs),
    /// Distance along rotations about one axis.
    Slice(SliceArgs),
    /// Seeded pose-fitting trials.
    Fit(FitArgs),
}

/// Where the object comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Source {
    /// Model file (OBJ, PLY or CSV point list).
    #[arg(long, group = "source")]
    pub model: Option<PathBuf>,
    /// Generated toy shape, e.g. `pyramid:4` or `cube@3000`.
    #[arg(long, group = "source")]
    pub shape: Option<String>,
    /// Seed for shape generation.
    #[arg(long, default_value_t = 0)]
    pub shape_seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectorFlags {
    /// Hausdorff tolerance as a fraction of the object radius.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Orders above this count as continuous.
    #[arg(long)]
    pub rho: Option<u32>,
    #[arg(long)]
    pub max_order: Option<u32>,
    #[arg(long)]
    pub axis_candidates: Option<usize>,
}

impl DetectorFlags {
    fn config(&self) -> DetectorConfig {
        let d = DetectorConfig::default();
        DetectorConfig {
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            rho: self.rho.unwrap_or(d.rho),
            max_order: self.max_order.unwrap_or(d.max_order),
            axis_candidates: self.axis_candidates.unwrap_or(d.axis_candidates),
            ..d
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GpArgs {
    #[command(flatten)]
    pub source: Source,
    /// Symmetry JSON written by `detect`.
    #[arg(long, conflicts_with_all = ["model", "shape"])]
    pub symmetry: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Primitive radius in normalized units, or `auto` for the object radius.
    #[arg(long, default_value = "auto")]
    pub radius: String,
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    /// Grouped primitives JSON written by `gp`.
    #[arg(long)]
    pub gp: Option<PathBuf>,
    /// Model or shape for ADD / ADD-S, and for the primitives when `--gp` is absent.
    #[command(flatten)]
    pub source: Source,
    /// JSON lines: `{"object_id", "t_hat": {rotation, translation}, "t_dot": {..}}`.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Comma-separated metrics.
    #[arg(long, value_delimiter = ',', default_value = "amgpd")]
    pub metric: Vec<MetricKind>,
    /// AUC upper threshold.
    #[arg(long, default_value_t = DEFAULT_AUC_MAX)]
    pub auc_max: f64,
    /// Report distances in model units instead of normalized units.
    #[arg(long)]
    pub metric_units: bool,
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub gp: Option<PathBuf>,
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "amgpd")]
    pub metric: MetricKind,
    /// Rotation samples.
    #[arg(short = 'N', long = "samples", default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Resample the model to this many points for ADD / ADD-S.
    #[arg(long)]
    pub model_points: Option<usize>,
    #[arg(long)]
    pub metric_units: bool,
    /// Directory for `landscape.csv` and `minima.json`.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SliceArgs {
    #[arg(long)]
    pub gp: Option<PathBuf>,
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "amgpd")]
    pub metric: MetricKind,
    /// Rotation axis `x,y,z`; defaults to the first symmetry axis, else z.
    #[arg(long, value_delimiter = ',')]
    pub axis: Option<Vec<f64>>,
    #[arg(long, default_value_t = 360)]
    pub steps: usize,
    #[arg(long)]
    pub model_points: Option<usize>,
    #[arg(long)]
    pub metric_units: bool,
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum InitKind {
    /// Uniformly random initial rotations.
    Uniform,
    /// Near the shape's spurious flip.
    Flip,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Comma-separated toy shapes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "amgpd")]
    pub loss: Vec<MetricKind>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitKind::Uniform)]
    pub init: InitKind,
    /// Largest initial offset from the flip, in degrees.
    #[arg(long, default_value_t = 30.0)]
    pub init_max_angle: f64,
    #[arg(long, default_value_t = FitConfig::default().max_iterations)]
    pub max_iterations: usize,
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parses the arguments, runs, prints errors and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) => EXIT_PRECONDITION,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Detect(a) => cmd_detect(&a),
        Command::Gp(a) => cmd_gp(&a),
        Command::Dist(a) => cmd_dist(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Slice(a) => cmd_slice(&a),
        Command::Fit(a) => cmd_fit(&a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())
                .and_then(|_| s.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Raw points of the source object plus a label.
fn load_points(src: &Source) -> Result<(String, PointSet)> {
    match (&src.model, &src.shape) {
        (Some(path), _) => {
            let fmt = ModelFormat::from_path(path)
                .ok_or_else(|| Error::invalid(format!("unknown model format: {}", path.display())))?;
            Ok((path.display().to_string(), load_model(path, fmt)?))
        }
        (None, Some(s)) => {
            let spec: ShapeSpec = s.parse()?;
            Ok((spec.to_string(), generate_shape(&spec, src.shape_seed)?))
        }
        (None, None) => Err(Error::invalid("give --model or --shape")),
    }
}

fn detect_source(src: &Source, det: &DetectorFlags) -> Result<(String, PointSet, SymmetrySet)> {
    let (name, points) = load_points(src)?;
    let sym = detect(&points, &det.config())?;
    Ok((name, points, sym))
}

fn symmetry_json(name: &str, sym: &SymmetrySet) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(sym)?;
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("object".into(), name.into());
    }
    Ok(v)
}

pub fn cmd_detect(a: &DetectArgs) -> Result<i32> {
    let header = RunHeader::new(None, a)?;
    let (name, _, sym) = detect_source(&a.source, &a.detector)?;
    emit(a.out.as_deref(), &pretty(&header.envelope(symmetry_json(&name, &sym)?))?)?;
    Ok(EXIT_OK)
}

fn parse_radius(s: &str, auto: f64) -> Result<f64> {
    if s == "auto" {
        return Ok(auto);
    }
    s.parse::<f64>()
        .map_err(|_| Error::invalid(format!("radius must be a number or `auto`, got `{s}`")))
}

pub fn cmd_gp(a: &GpArgs) -> Result<i32> {
    let header = RunHeader::new(None, a)?;
    let (name, sym) = match &a.symmetry {
        Some(p) => (p.display().to_string(), serde_json::from_str::<SymmetrySet>(&read(p)?)?),
        None => {
            let (name, _, sym) = detect_source(&a.source, &a.detector)?;
            (name, sym)
        }
    };
    let gp = build_gp(&sym, parse_radius(&a.radius, sym.radius)?)?;
    let mut body: serde_json::Value = serde_json::from_str(&gp.to_json()?)?;
    if let serde_json::Value::Object(m) = &mut body {
        m.insert("object".into(), name.into());
    }
    emit(a.out.as_deref(), &pretty(&header.envelope(body))?)?;
    Ok(EXIT_OK)
}

/// What a distance command evaluates: the primitives (read or built) and, for the
/// point-based metrics, the normalized model.
struct Target {
    name: String,
    gp: GroupedPrimitives,
    model: Option<PointSet>,
}

fn load_target(gp: Option<&Path>, src: &Source, need_model: bool, model_points: Option<usize>) -> Result<Target> {
    let has_source = src.model.is_some() || src.shape.is_some();
    let mut name = String::new();
    let mut built = None;
    let mut model = None;
    if has_source {
        let (n, points) = load_points(src)?;
        name = n;
        if gp.is_none() {
            let sym = detect(&points, &DetectorConfig::default())?;
            built = Some(build_gp(&sym, sym.radius)?);
        }
        if need_model {
            let norm = normalize_point_set(&points).points;
            model = Some(match model_points {
                Some(k) => resample_surface(&norm, k)?,
                None => norm,
            });
        }
    } else if need_model {
        return Err(Error::invalid("ADD and ADD-S need --model or --shape"));
    }
    let gp = match (gp, built) {
        (Some(p), _) => {
            if name.is_empty() {
                name = p.display().to_string();
            }
            GroupedPrimitives::from_json(&read(p)?)?
        }
        (None, Some(g)) => g,
        (None, None) => return Err(Error::invalid("give --gp, --model or --shape")),
    };
    Ok(Target { name, gp, model })
}

impl Target {
    fn distance(&self, kind: MetricKind) -> Result<PoseDistance> {
        if kind.needs_model() {
            let m = self
                .model
                .clone()
                .ok_or_else(|| Error::invalid(format!("{kind} needs --model or --shape")))?;
            PoseDistance::model(m, kind)
        } else {
            PoseDistance::grouped(self.gp.clone(), kind)
        }
    }

    /// Multiplier from normalized to model units.
    fn unit(&self, metric_units: bool) -> f64 {
        if metric_units {
            1.0 / self.gp.scale()
        } else {
            1.0
        }
    }
}

#[derive(Debug, Deserialize)]
struct PosePair {
    #[serde(alias = "object-id", alias = "id")]
    object_id: String,
    t_hat: RigidTransform,
    t_dot: RigidTransform,
}

fn read_pairs(path: &Path) -> Result<Vec<PosePair>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let pair: PosePair = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(pair);
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("{}: no pose pairs", path.display())));
    }
    Ok(out)
}

pub fn cmd_dist(a: &DistArgs) -> Result<i32> {
    if a.metric.is_empty() {
        return Err(Error::invalid("no metric given"));
    }
    let header = RunHeader::new(None, a)?;
    let need_model = a.metric.iter().any(MetricKind::needs_model);
    let target = load_target(a.gp.as_deref(), &a.source, need_model, None)?;
    let pairs = read_pairs(&a.pairs)?;
    let unit = target.unit(a.metric_units);
    let distances: Vec<PoseDistance> = a.metric.iter().map(|&k| target.distance(k)).collect::<Result<_>>()?;
    let values: Vec<Vec<f64>> = distances
        .iter()
        .map(|d| pairs.iter().map(|p| d.eval(&p.t_hat, &p.t_dot) * unit).collect())
        .collect();

    let mut out = header.comment_lines();
    let _ = writeln!(out, "# object: {}", target.name);
    out.push_str("object_id");
    for k in &a.metric {
        let _ = write!(out, ",{k}");
    }
    out.push('\n');
    for (i, p) in pairs.iter().enumerate() {
        out.push_str(&p.object_id);
        for v in &values {
            let _ = write!(out, ",{}", v[i]);
        }
        out.push('\n');
    }
    for (k, v) in a.metric.iter().zip(&values) {
        let curve = auc(v, a.auc_max)?;
        let _ = writeln!(out, "# auc {k}: {}", curve.area);
    }
    emit(a.out.as_deref(), &out)?;
    Ok(EXIT_OK)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let header = RunHeader::new(Some(a.seed), a)?;
    let target = load_target(a.gp.as_deref(), &a.source, a.metric.needs_model(), a.model_points)?;
    let distance = target.distance(a.metric)?;
    let mut landscape = build_landscape(&distance, a.samples, a.neighbors, a.seed)?;
    let report = descend_to_minima(&landscape, target.gp.symmetry_group());
    let unit = target.unit(a.metric_units);
    if unit != 1.0 {
        for s in &mut landscape.samples {
            s.d *= unit;
        }
    }
    let mut report_out = report.clone();
    for m in &mut report_out.minima {
        m.d *= unit;
    }
    let meta = ExportMeta {
        object: target.name.clone(),
        metric: a.metric.to_string(),
        header,
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let csv = a.out_dir.join("landscape.csv");
    std::fs::write(&csv, meta.csv(&landscape, &report_out)).map_err(|e| Error::io(&csv, e))?;
    let js = a.out_dir.join("minima.json");
    std::fs::write(&js, meta.json(&landscape, &report_out)?).map_err(|e| Error::io(&js, e))?;
    eprintln!(
        "{}: {} minima, all_correct = {}",
        target.name,
        report.minima.len(),
        report.all_correct
    );
    Ok(if report.all_correct { EXIT_OK } else { EXIT_SPURIOUS })
}

pub fn cmd_slice(a: &SliceArgs) -> Result<i32> {
    let header = RunHeader::new(None, a)?;
    let target = load_target(a.gp.as_deref(), &a.source, a.metric.needs_model(), a.model_points)?;
    let axis = match &a.axis {
        Some(v) => {
            let [x, y, z] = v[..] else {
                return Err(Error::invalid("slice axis needs three components x,y,z"));
            };
            let w = Vec3::new(x, y, z);
            if !(w.norm() > 1e-12) {
                return Err(Error::invalid("slice axis must be non-zero"));
            }
            w.normalize()
        }
        None => target
            .gp
            .symmetry_group()
            .generators()
            .first()
            .and_then(|g| {
                let v = g.to_rotation_vector();
                (v.angle() > 1e-9).then(|| v.vector() / v.angle())
            })
            .or_else(|| match target.gp.symmetry_group() {
                crate::symmetry::SymmetryGroup::Axial { axis, .. } => Some(*axis),
                _ => None,
            })
            .unwrap_or_else(Vec3::z),
    };
    let distance = target.distance(a.metric)?;
    let points = crate::landscape::slice_1d(&distance, &axis, a.steps)?;
    let unit = target.unit(a.metric_units);
    let mut out = header.comment_lines();
    let _ = writeln!(
        out,
        "# object: {}\n# metric: {}\n# axis: {},{},{}",
        target.name, a.metric, axis.x, axis.y, axis.z
    );
    out.push_str("angle_deg,d\n");
    for p in &points {
        let _ = writeln!(out, "{},{}", p.angle_deg, p.d * unit);
    }
    emit(a.out.as_deref(), &out)?;
    Ok(EXIT_OK)
}

pub fn cmd_fit(a: &FitArgs) -> Result<i32> {
    let header = RunHeader::new(Some(a.seed), a)?;
    let cfg = FitConfig {
        max_iterations: a.max_iterations,
        ..FitConfig::default()
    };
    let mut rows = Vec::new();
    for s in &a.shape {
        let spec: ShapeSpec = s.parse()?;
        let init = match a.init {
            InitKind::Uniform => InitMode::Uniform,
            InitKind::Flip => InitMode::Near {
                center: spurious_flip(&spec)?,
                max_angle_deg: a.init_max_angle,
            },
        };
        let problem = FitProblem::from_shape(&spec, 0)?;
        rows.extend(batch_fit(&[problem], &a.loss, a.trials, a.seed, &init, &cfg)?);
    }
    emit(a.out.as_deref(), &results_csv(&rows, &header))?;
    for (shape, loss, rate) in success_rates(&rows) {
        eprintln!("{shape} {loss}: {:.1}% correct", 100.0 * rate);
    }
    Ok(EXIT_OK)
}

fn spurious_flip(spec: &ShapeSpec) -> Result<RotationMatrix> {
    spec.spurious_flip()
        .ok_or_else(|| Error::Precondition(format!("{spec} has no spurious flip to start near")))
}
