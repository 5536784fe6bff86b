//! ASCII model readers: OBJ `v` lines, PLY ascii 1.0 vertex elements, CSV `x,y,z` rows.

use std::path::Path;

use crate::geom::{NnIndex, PointSet, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Obj,
    Ply,
    Csv,
}

impl ModelFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            "csv" | "xyz" => Some(Self::Csv),
            _ => None,
        }
    }
}

/// Coincident vertices closer than this are merged.
pub const MERGE_DISTANCE: f64 = 1e-9;

pub fn load_model(path: &Path, format: ModelFormat) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, format)
}

pub fn parse_model(text: &str, format: ModelFormat) -> Result<PointSet> {
    let raw = match format {
        ModelFormat::Obj => parse_obj(text)?,
        ModelFormat::Ply => parse_ply(text)?,
        ModelFormat::Csv => parse_csv(text)?,
    };
    if raw.is_empty() {
        return Err(Error::EmptyModel);
    }
    PointSet::new(merge_duplicates(raw))
}

fn parse_coord(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: "missing coordinate".into(),
    })?;
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number `{}`", tok.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite coordinate `{}`", tok.trim()),
        });
    }
    Ok(v)
}

fn parse_obj(text: &str) -> Result<Vec<Vec3>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        if toks.next() != Some("v") {
            continue;
        }
        let ln = i + 1;
        out.push(Vec3::new(
            parse_coord(toks.next(), ln)?,
            parse_coord(toks.next(), ln)?,
            parse_coord(toks.next(), ln)?,
        ));
    }
    Ok(out)
}

fn parse_ply(text: &str) -> Result<Vec<Vec3>> {
    let mut lines = text.lines().enumerate();
    let perr = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(perr(1, "missing `ply` magic")),
    }
    let mut vertex_count = None;
    let mut in_vertex = false;
    let mut props: Vec<String> = Vec::new();
    let mut header_end = None;
    for (i, line) in lines.by_ref() {
        let ln = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", "1.0"] => {}
            ["format", other, ..] => {
                return Err(perr(ln, &format!("unsupported PLY format `{other}`")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    vertex_count = Some(
                        count
                            .parse::<usize>()
                            .map_err(|_| perr(ln, "invalid vertex count"))?,
                    );
                }
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(perr(ln, "list property on vertex element"));
                }
            }
            ["property", _ty, name] => {
                if in_vertex {
                    props.push(name.to_string());
                }
            }
            ["end_header"] => {
                header_end = Some(ln);
                break;
            }
            _ => return Err(perr(ln, &format!("unrecognized header line `{line}`"))),
        }
    }
    let header_end = header_end.ok_or_else(|| perr(header_end.unwrap_or(0), "missing end_header"))?;
    let n = vertex_count.ok_or_else(|| perr(header_end, "no vertex element"))?;
    let col = |name: &str| {
        props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| perr(header_end, &format!("vertex element lacks `{name}`")))
    };
    let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (i, line) = lines
            .next()
            .ok_or_else(|| perr(header_end + out.len() + 1, "truncated vertex list"))?;
        let ln = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < props.len() {
            return Err(perr(ln, "too few vertex properties"));
        }
        out.push(Vec3::new(
            parse_coord(toks.get(cx).copied(), ln)?,
            parse_coord(toks.get(cy).copied(), ln)?,
            parse_coord(toks.get(cz).copied(), ln)?,
        ));
    }
    Ok(out)
}

fn parse_csv(text: &str) -> Result<Vec<Vec3>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ln = i + 1;
        let mut toks = line.split(',');
        let first = toks.clone().next().unwrap_or("").trim();
        if out.is_empty() && first.parse::<f64>().is_err() && first.eq_ignore_ascii_case("x") {
            continue; // header row
        }
        let p = Vec3::new(
            parse_coord(toks.next(), ln)?,
            parse_coord(toks.next(), ln)?,
            parse_coord(toks.next(), ln)?,
        );
        if toks.next().is_some() {
            return Err(Error::Parse {
                line: ln,
                message: "expected exactly three columns".into(),
            });
        }
        out.push(p);
    }
    Ok(out)
}

/// Keeps the first of every cluster of points within [`MERGE_DISTANCE`].
pub(crate) fn merge_duplicates(points: Vec<Vec3>) -> Vec<Vec3> {
    let index = NnIndex::from_points(&points);
    let mut dropped = vec![false; points.len()];
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        out.push(*p);
        for j in index.within(p, MERGE_DISTANCE) {
            if j > i {
                dropped[j] = true;
            }
        }
    }
    out
}
