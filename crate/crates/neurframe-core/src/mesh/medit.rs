//! MEDIT ASCII `.mesh` reading and writing.
//!
//! Only the sections we consume are interpreted: `Vertices` and
//! `Tetrahedra`. `Triangles` are parsed for well-formedness but discarded;
//! boundary faces and their orientation are always recomputed.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::{MeshError, TetMesh};

struct Tokens<'a> {
    items: Vec<(&'a str, usize)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                items.push((tok, i + 1));
            }
        }
        Tokens { items, pos: 0 }
    }

    fn peek(&self) -> Option<(&'a str, usize)> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<(&'a str, usize), MeshError> {
        let item = self.items.get(self.pos).copied().ok_or_else(|| MeshError::Parse {
            line: self.items.last().map_or(0, |t| t.1),
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(item)
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<(T, usize), MeshError> {
        let (tok, line) = self.next(what)?;
        tok.parse::<T>()
            .map(|v| (v, line))
            .map_err(|_| MeshError::Parse { line, message: format!("expected {what}, found '{tok}'") })
    }
}

/// Loads and validates a tet mesh from a MEDIT ASCII file.
pub fn load_tet_mesh(path: &Path) -> Result<TetMesh, MeshError> {
    parse_medit(&std::fs::read_to_string(path)?)
}

pub(crate) fn parse_medit(text: &str) -> Result<TetMesh, MeshError> {
    let mut toks = Tokens::new(text);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut tets: Vec<[usize; 4]> = Vec::new();
    let mut saw_end = false;

    while let Some((keyword, line)) = toks.peek() {
        toks.pos += 1;
        match keyword {
            "MeshVersionFormatted" => {
                toks.number::<u32>("format version")?;
            }
            "Dimension" => {
                let (dim, line) = toks.number::<u32>("dimension")?;
                if dim != 3 {
                    return Err(MeshError::Parse {
                        line,
                        message: format!("dimension {dim} is not supported, expected 3"),
                    });
                }
            }
            "Vertices" => {
                let (n, _) = toks.number::<usize>("vertex count")?;
                vertices.reserve(n);
                for _ in 0..n {
                    let (x, _) = toks.number::<f64>("vertex coordinate")?;
                    let (y, _) = toks.number::<f64>("vertex coordinate")?;
                    let (z, _) = toks.number::<f64>("vertex coordinate")?;
                    toks.number::<i64>("vertex reference")?;
                    vertices.push(Point3::new(x, y, z));
                }
            }
            "Triangles" => {
                let (n, _) = toks.number::<usize>("triangle count")?;
                for _ in 0..n {
                    for _ in 0..3 {
                        vertex_index(&mut toks, vertices.len())?;
                    }
                    toks.number::<i64>("triangle reference")?;
                }
            }
            "Tetrahedra" => {
                let (n, _) = toks.number::<usize>("tet count")?;
                tets.reserve(n);
                for _ in 0..n {
                    let mut t = [0usize; 4];
                    for slot in &mut t {
                        *slot = vertex_index(&mut toks, vertices.len())?;
                    }
                    toks.number::<i64>("tet reference")?;
                    tets.push(t);
                }
            }
            "End" => {
                saw_end = true;
                break;
            }
            other => {
                return Err(MeshError::Parse {
                    line,
                    message: format!("unknown keyword '{other}'"),
                });
            }
        }
    }
    if !saw_end {
        return Err(MeshError::Parse {
            line: toks.items.last().map_or(0, |t| t.1),
            message: "missing End keyword".into(),
        });
    }
    TetMesh::from_parts(vertices, tets)
}

// MEDIT indices are 1-based; returns the 0-based index
fn vertex_index(toks: &mut Tokens, n_vertices: usize) -> Result<usize, MeshError> {
    let (idx, line) = toks.number::<i64>("vertex index")?;
    if idx < 1 || idx as usize > n_vertices {
        return Err(MeshError::Parse {
            line,
            message: format!("vertex index {idx} out of range 1..={n_vertices}"),
        });
    }
    Ok(idx as usize - 1)
}

/// Writes a mesh as MEDIT ASCII with full float precision; boundary faces go
/// into the `Triangles` section for viewers.
pub fn write_tet_mesh(mesh: &TetMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, format_medit(mesh))?;
    Ok(())
}

pub(crate) fn format_medit(mesh: &TetMesh) -> String {
    let mut out = String::new();
    out.push_str("MeshVersionFormatted 2\nDimension 3\n");
    let _ = write!(out, "Vertices\n{}\n", mesh.vertices().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} 0", v.x, v.y, v.z);
    }
    let _ = write!(out, "Triangles\n{}\n", mesh.boundary_faces().len());
    for bf in mesh.boundary_faces() {
        let _ = writeln!(out, "{} {} {} 0", bf.verts[0] + 1, bf.verts[1] + 1, bf.verts[2] + 1);
    }
    let _ = write!(out, "Tetrahedra\n{}\n", mesh.tets().len());
    for t in mesh.tets() {
        let _ = writeln!(out, "{} {} {} {} 0", t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1);
    }
    out.push_str("End\n");
    out
}
