//! Wavefront OBJ polylines: `v` positions joined by `l` records. Used for
//! user-specified feature curves on input and for exporting streamlines.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::MeshError;

/// Reads the polylines of an OBJ file; records other than `v` and `l` are
/// skipped.
pub fn load_obj_polylines(path: &Path) -> Result<Vec<Vec<Point3<f64>>>, MeshError> {
    parse_obj_polylines(&std::fs::read_to_string(path)?)
}

pub(crate) fn parse_obj_polylines(text: &str) -> Result<Vec<Vec<Point3<f64>>>, MeshError> {
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut polylines: Vec<Vec<Point3<f64>>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for slot in &mut coords {
                    let tok = toks.next().ok_or_else(|| MeshError::Parse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse().map_err(|_| MeshError::Parse {
                        line,
                        message: format!("bad coordinate '{tok}'"),
                    })?;
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("l") => {
                let mut pts = Vec::new();
                for tok in toks {
                    let idx: i64 = tok.parse().map_err(|_| MeshError::Parse {
                        line,
                        message: format!("bad vertex index '{tok}'"),
                    })?;
                    if idx < 1 || idx as usize > vertices.len() {
                        return Err(MeshError::Parse {
                            line,
                            message: format!("vertex index {idx} out of range 1..={}", vertices.len()),
                        });
                    }
                    pts.push(vertices[idx as usize - 1]);
                }
                if pts.len() < 2 {
                    return Err(MeshError::Parse {
                        line,
                        message: "polyline needs at least two vertices".into(),
                    });
                }
                polylines.push(pts);
            }
            _ => {}
        }
    }
    Ok(polylines)
}

/// Writes polylines as OBJ `v`/`l` records with full float precision.
pub fn write_obj_polylines(polylines: &[Vec<Point3<f64>>], path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, format_obj_polylines(polylines))?;
    Ok(())
}

pub(crate) fn format_obj_polylines(polylines: &[Vec<Point3<f64>>]) -> String {
    let mut out = String::new();
    let mut next = 1usize;
    for line in polylines {
        for p in line {
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
        }
        let _ = write!(out, "l");
        for k in 0..line.len() {
            let _ = write!(out, " {}", next + k);
        }
        out.push('\n');
        next += line.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vertices_and_polylines() {
        let text = "# comment\nv 0 0 0\nv 1 0 0\nv 1 1 0\no name\nl 1 2 3\n";
        let lines = parse_obj_polylines(text).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 3);
        assert_eq!(lines[0][2], Point3::new(1.0, 1.0, 0.0));
    }

    #[test]
    fn bad_index_reports_its_line() {
        let text = "v 0 0 0\nv 1 0 0\nl 1 5\n";
        match parse_obj_polylines(text).unwrap_err() {
            MeshError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains('5'), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn round_trips_through_format() {
        let lines = vec![
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.25, 0.5, 1.0)],
            vec![
                Point3::new(1.0, 2.0, 3.0),
                Point3::new(4.0, 5.0, 6.0),
                Point3::new(7.0, 8.0, 9.0),
            ],
        ];
        let text = format_obj_polylines(&lines);
        let back = parse_obj_polylines(&text).unwrap();
        assert_eq!(lines, back);
    }

    #[test]
    fn faces_are_ignored() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
        assert!(parse_obj_polylines(text).unwrap().is_empty());
    }
}
