//! Plain-text serialization for analysis products: per-tet frames, singular
//! points as PLY, and surface cross fields.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{AnalysisError, SingularPointSet};
use crate::analysis::crossfield::Cross;
use crate::frame::Frame;

/// Renders frames as a `FRAMES <count>` header followed by one line per tet:
/// the tet index and the nine rotation entries in row-major order.
pub fn format_frames(frames: &[Frame]) -> String {
    let mut out = format!("FRAMES {}\n", frames.len());
    for (i, frame) in frames.iter().enumerate() {
        out.push_str(&i.to_string());
        let m = frame.matrix();
        for r in 0..3 {
            for c in 0..3 {
                out.push_str(&format!(" {:.16e}", m[(r, c)]));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_frames(frames: &[Frame], path: &Path) -> Result<(), AnalysisError> {
    fs::write(path, format_frames(frames))?;
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> AnalysisError {
    AnalysisError::Parse { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, AnalysisError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

/// Parses the `format_frames` layout. Rows may appear in any order but every
/// tet index in `0..count` must appear exactly once, and each matrix must be
/// a rotation.
pub fn parse_frames(text: &str) -> Result<Vec<Frame>, AnalysisError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let count: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["FRAMES", n] => n.parse().map_err(|_| parse_err(1, "invalid frame count"))?,
        _ => return Err(parse_err(1, "expected `FRAMES <count>` header")),
    };

    let mut frames: Vec<Option<Frame>> = vec![None; count];
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let tet: usize = parse_num(tok.next(), lineno, "tet index")?;
        if tet >= count {
            return Err(parse_err(lineno, format!("tet index {tet} out of range ({count})")));
        }
        if frames[tet].is_some() {
            return Err(parse_err(lineno, format!("duplicate tet index {tet}")));
        }
        let mut m = Matrix3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] = parse_num(tok.next(), lineno, "matrix entry")?;
            }
        }
        if tok.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after matrix"));
        }
        let frame =
            Frame::new(m).map_err(|e| parse_err(lineno, format!("bad rotation: {e}")))?;
        frames[tet] = Some(frame);
    }

    let mut out = Vec::with_capacity(count);
    for (tet, frame) in frames.into_iter().enumerate() {
        out.push(frame.ok_or_else(|| parse_err(0, format!("missing tet index {tet}")))?);
    }
    Ok(out)
}

pub fn load_frames(path: &Path) -> Result<Vec<Frame>, AnalysisError> {
    parse_frames(&fs::read_to_string(path)?)
}

/// Renders singular points as ascii PLY with a per-vertex integer
/// `rotation_class` property holding the loop rotation's group index.
pub fn format_singular_ply(points: &SingularPointSet) -> String {
    let mut out = String::from("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", points.points.len()));
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    out.push_str("property int rotation_class\nend_header\n");
    for p in &points.points {
        out.push_str(&format!(
            "{:.16e} {:.16e} {:.16e} {}\n",
            p.position.x,
            p.position.y,
            p.position.z,
            p.rotation_class.index()
        ));
    }
    out
}

pub fn write_singular_ply(points: &SingularPointSet, path: &Path) -> Result<(), AnalysisError> {
    fs::write(path, format_singular_ply(points))?;
    Ok(())
}

/// Renders one line per boundary triangle: the triangle index followed by
/// the cross's u and v components.
pub fn format_cross_field(crosses: &[Cross]) -> String {
    let mut out = String::new();
    for (i, cross) in crosses.iter().enumerate() {
        out.push_str(&format!(
            "{i} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
            cross.u.x, cross.u.y, cross.u.z, cross.v.x, cross.v.y, cross.v.z
        ));
    }
    out
}

pub fn write_cross_field(crosses: &[Cross], path: &Path) -> Result<(), AnalysisError> {
    fs::write(path, format_cross_field(crosses))?;
    Ok(())
}

/// Parses the `format_cross_field` layout. Triangle indices may appear in
/// any order but must cover `0..line_count` exactly once; each u, v pair
/// must be unit and orthogonal.
pub fn parse_cross_field(text: &str) -> Result<Vec<Cross>, AnalysisError> {
    let rows: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let count = rows.len();
    let mut crosses: Vec<Option<Cross>> = vec![None; count];
    for (idx, line) in rows {
        let lineno = idx + 1;
        let mut tok = line.split_whitespace();
        let tri: usize = parse_num(tok.next(), lineno, "triangle index")?;
        if tri >= count {
            return Err(parse_err(lineno, format!("triangle index {tri} out of range ({count})")));
        }
        if crosses[tri].is_some() {
            return Err(parse_err(lineno, format!("duplicate triangle index {tri}")));
        }
        let mut read = |what| parse_num::<f64>(tok.next(), lineno, what);
        let u = Vector3::new(read("u.x")?, read("u.y")?, read("u.z")?);
        let v = Vector3::new(read("v.x")?, read("v.y")?, read("v.z")?);
        if tok.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after cross"));
        }
        if (u.norm() - 1.0).abs() > 1e-6 || (v.norm() - 1.0).abs() > 1e-6 {
            return Err(parse_err(lineno, "cross axes must be unit vectors"));
        }
        if u.dot(&v).abs() > 1e-6 {
            return Err(parse_err(lineno, "cross axes must be orthogonal"));
        }
        crosses[tri] = Some(Cross { u, v });
    }
    let mut out = Vec::with_capacity(count);
    for (tri, cross) in crosses.into_iter().enumerate() {
        out.push(cross.ok_or_else(|| parse_err(0, format!("missing triangle index {tri}")))?);
    }
    Ok(out)
}

pub fn load_cross_field(path: &Path) -> Result<Vec<Cross>, AnalysisError> {
    parse_cross_field(&fs::read_to_string(path)?)
}
