use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::json;

use super::{Landscape, MinimaReport};
use crate::report::RunHeader;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::invalid(format!("unknown export format `{s}`"))),
        }
    }
}

/// What was evaluated, for the file header.
#[derive(Debug, Clone)]
pub struct ExportMeta {
    pub object: String,
    pub metric: String,
    pub header: RunHeader,
}

impl ExportMeta {
    /// CSV: header comments, one `v_x,v_y,v_z,d` row per sample, then the minima as
    /// `#`-prefixed rows so plain CSV readers see only the samples.
    pub fn csv(&self, landscape: &Landscape, report: &MinimaReport) -> String {
        let mut out = self.header.comment_lines();
        let _ = writeln!(out, "# object: {}\n# metric: {}", self.object, self.metric);
        out.push_str("v_x,v_y,v_z,d\n");
        for s in &landscape.samples {
            let _ = writeln!(out, "{},{},{},{}", s.v.x, s.v.y, s.v.z, s.d);
        }
        out.push_str("# minima: index,v_x,v_y,v_z,d,basin,nearest_sym_gap_deg,correct,manifold\n");
        for m in &report.minima {
            let _ = writeln!(
                out,
                "# {},{},{},{},{},{},{},{},{}",
                m.index,
                m.v.x,
                m.v.y,
                m.v.z,
                m.d,
                m.basin,
                m.nearest_sym_gap.to_degrees(),
                m.correct,
                m.manifold
            );
        }
        let _ = writeln!(out, "# all_correct: {}", report.all_correct);
        out
    }

    pub fn json(&self, landscape: &Landscape, report: &MinimaReport) -> Result<String> {
        let minima: Vec<_> = report
            .minima
            .iter()
            .map(|m| {
                json!({
                    "index": m.index,
                    "v": [m.v.x, m.v.y, m.v.z],
                    "d": m.d,
                    "basin": m.basin,
                    "terminals": m.terminals.len(),
                    "nearest_sym_gap_deg": m.nearest_sym_gap.to_degrees(),
                    "correct": m.correct,
                    "manifold": m.manifold,
                })
            })
            .collect();
        let body = json!({
            "object": self.object,
            "metric": self.metric,
            "N": landscape.len(),
            "max_gap_deg": report.max_gap.to_degrees(),
            "minima": minima,
            "all_correct": report.all_correct,
        });
        let mut text = serde_json::to_string_pretty(&self.header.envelope(body))?;
        text.push('\n');
        Ok(text)
    }
}

pub fn export_landscape(
    landscape: &Landscape,
    report: &MinimaReport,
    meta: &ExportMeta,
    path: &Path,
    format: ExportFormat,
) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => meta.csv(landscape, report),
        ExportFormat::Json => meta.json(landscape, report)?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::build_gp_from_axes;
    use crate::landscape::{build_landscape, descend_to_minima};
    use crate::metrics::{MetricKind, PoseDistance};
    use crate::symmetry::AxisAngle;
    use crate::geom::Vec3;

    #[test]
    fn csv_rows_and_minima_cross_check() {
        let gp = build_gp_from_axes(&[AxisAngle::new(Vec3::z(), 2).unwrap()], 1.0).unwrap();
        let group = gp.symmetry_group().clone();
        let l = build_landscape(&PoseDistance::grouped(gp, MetricKind::Agpd).unwrap(), 500, 12, 1).unwrap();
        let r = descend_to_minima(&l, &group);
        let meta = ExportMeta {
            object: "c2".into(),
            metric: "agpd".into(),
            header: RunHeader::new(Some(1), &500).unwrap(),
        };
        let csv = meta.csv(&l, &r);
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), 500);
        for m in &r.minima {
            let line = format!("{},{},{},{}", m.v.x, m.v.y, m.v.z, m.d);
            assert_eq!(rows[m.index], line);
        }
        assert_eq!(csv, meta.csv(&l, &r));

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.json");
        export_landscape(&l, &r, &meta, &p, ExportFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["N"], 500);
        assert_eq!(v["schema"], 1);
        let missing = dir.path().join("nope/l.csv");
        assert!(matches!(
            export_landscape(&l, &r, &meta, &missing, ExportFormat::Csv),
            Err(Error::Io { .. })
        ));
    }
}
