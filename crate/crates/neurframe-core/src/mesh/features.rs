//! Sharp-edge features: detection from dihedral angles, a grid-accelerated
//! nearest-segment query, and the plain-text segment file format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use super::{MeshError, NormalizeTransform, TetMesh};

/// Grid cell size for the nearest-feature index (normalized units).
pub const FEATURE_GRID_CELL: f64 = 0.05;

// two consecutive edges merge only if parallel this tightly
const COLLINEAR_TOL: f64 = 1e-9;

/// Straight feature segment with precomputed unit direction.
#[derive(Debug, Clone)]
pub struct FeatureSegment {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    direction: Vector3<f64>,
}

impl FeatureSegment {
    pub fn new(a: Point3<f64>, b: Point3<f64>) -> Result<Self, MeshError> {
        let d = b - a;
        if d.norm() < 1e-14 {
            return Err(MeshError::Parse {
                line: 0,
                message: format!("zero-length feature segment at {a:?}"),
            });
        }
        Ok(FeatureSegment { a, b, direction: d.normalize() })
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    fn distance_to(&self, p: &Point3<f64>) -> f64 {
        let ab = self.b - self.a;
        let t = ((p - self.a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        (p - (self.a + ab * t)).norm()
    }
}

/// Feature segments plus a uniform-grid index for nearest queries.
#[derive(Debug, Clone, Default)]
pub struct FeatureSet {
    segments: Vec<FeatureSegment>,
    grid: Option<FeatureGrid>,
}

impl FeatureSet {
    pub fn new(segments: Vec<FeatureSegment>) -> Self {
        let grid = if segments.is_empty() {
            None
        } else {
            Some(FeatureGrid::build(&segments))
        };
        FeatureSet { segments, grid }
    }

    pub fn empty() -> Self {
        FeatureSet::default()
    }

    pub fn segments(&self) -> &[FeatureSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Re-expresses every segment through the given normalization.
    pub fn transformed(&self, t: &NormalizeTransform) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                FeatureSegment::new(t.to_normalized(&s.a), t.to_normalized(&s.b))
                    .expect("uniform scaling keeps segments non-degenerate")
            })
            .collect();
        FeatureSet::new(segments)
    }

    /// Distance to the nearest segment and that segment's direction; `None`
    /// when the set is empty. Ties go to the lowest segment index.
    pub fn distance(&self, p: &Point3<f64>) -> Option<(f64, Vector3<f64>)> {
        let grid = self.grid.as_ref()?;
        let (_, idx) = grid.nearest(p, &self.segments);
        let seg = &self.segments[idx];
        Some((seg.distance_to(p), seg.direction))
    }

    pub fn from_polylines(polylines: &[Vec<Point3<f64>>]) -> Result<Self, MeshError> {
        let mut segments = Vec::new();
        for line in polylines {
            for pair in line.windows(2) {
                segments.push(FeatureSegment::new(pair[0], pair[1])?);
            }
        }
        Ok(FeatureSet::new(segments))
    }
}

/// Distance from `p` to the nearest feature segment, plus its direction;
/// `None` when the set is empty.
pub fn feature_distance(p: &Point3<f64>, features: &FeatureSet) -> Option<(f64, Vector3<f64>)> {
    features.distance(p)
}

/// Marks boundary edges whose face normals disagree by more than
/// `angle_threshold` and merges collinear runs into maximal segments. Runs
/// stop at junctions where the edge count differs from two.
pub fn detect_features(mesh: &TetMesh, angle_threshold: f64) -> FeatureSet {
    let vertices = mesh.vertices();
    // boundary edge -> its two incident boundary faces, in discovery order
    let mut incident: HashMap<(usize, usize), (usize, Option<usize>)> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for (fi, bf) in mesh.boundary_faces().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (bf.verts[k], bf.verts[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match incident.get_mut(&key) {
                None => {
                    incident.insert(key, (fi, None));
                    order.push(key);
                }
                Some(slot) => slot.1 = Some(fi),
            }
        }
    }

    let faces = mesh.boundary_faces();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for key in order {
        let (f0, f1) = incident[&key];
        let f1 = f1.expect("boundary edges have two faces in a validated mesh");
        let cos = faces[f0].normal.dot(&faces[f1].normal).clamp(-1.0, 1.0);
        if cos.acos() > angle_threshold {
            edges.push(key);
        }
    }

    // merge collinear degree-2 runs
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for (ei, &(a, b)) in edges.iter().enumerate() {
        adjacency.entry(a).or_default().push(ei);
        adjacency.entry(b).or_default().push(ei);
    }
    let mut visited = vec![false; edges.len()];
    let mut segments = Vec::new();
    for start in 0..edges.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let (a, b) = edges[start];
        let head = extend_run(&edges, &adjacency, &mut visited, vertices, b, a);
        let tail = extend_run(&edges, &adjacency, &mut visited, vertices, a, b);
        segments.push(
            FeatureSegment::new(vertices[head], vertices[tail])
                .expect("merged runs join distinct vertices"),
        );
    }
    FeatureSet::new(segments)
}

// walks from `cur` away from `prev` while the run stays collinear and each
// junction joins exactly two feature edges; returns the final vertex
fn extend_run(
    edges: &[(usize, usize)],
    adjacency: &HashMap<usize, Vec<usize>>,
    visited: &mut [bool],
    vertices: &[Point3<f64>],
    mut prev: usize,
    mut cur: usize,
) -> usize {
    loop {
        let incident = &adjacency[&cur];
        if incident.len() != 2 {
            return cur;
        }
        let Some(&next_edge) = incident
            .iter()
            .find(|&&e| !visited[e] && edges[e] != (prev.min(cur), prev.max(cur)))
        else {
            return cur;
        };
        let (a, b) = edges[next_edge];
        let next = if a == cur { b } else { a };
        let d1 = (vertices[cur] - vertices[prev]).normalize();
        let d2 = (vertices[next] - vertices[cur]).normalize();
        if d1.cross(&d2).norm() > COLLINEAR_TOL || d1.dot(&d2) <= 0.0 {
            return cur;
        }
        visited[next_edge] = true;
        prev = cur;
        cur = next;
    }
}

#[derive(Debug, Clone)]
struct FeatureGrid {
    lo: Point3<f64>,
    dims: [usize; 3],
    cell: f64,
    cells: Vec<Vec<u32>>,
}

impl FeatureGrid {
    fn build(segments: &[FeatureSegment]) -> Self {
        let mut lo = segments[0].a;
        let mut hi = segments[0].a;
        for s in segments {
            for p in [&s.a, &s.b] {
                for k in 0..3 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        let cell = FEATURE_GRID_CELL;
        let dims = std::array::from_fn(|k| (((hi[k] - lo[k]) / cell).ceil() as usize).max(1));
        let mut grid = FeatureGrid { lo, dims, cell, cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]] };
        for (si, s) in segments.iter().enumerate() {
            let c0: [usize; 3] = std::array::from_fn(|k| grid.coord(s.a[k].min(s.b[k]), k));
            let c1: [usize; 3] = std::array::from_fn(|k| grid.coord(s.a[k].max(s.b[k]), k));
            for i in c0[0]..=c1[0] {
                for j in c0[1]..=c1[1] {
                    for k in c0[2]..=c1[2] {
                        let idx = grid.flat([i, j, k]);
                        grid.cells[idx].push(si as u32);
                    }
                }
            }
        }
        grid
    }

    fn coord(&self, x: f64, axis: usize) -> usize {
        let c = ((x - self.lo[axis]) / self.cell).floor();
        (c.max(0.0) as usize).min(self.dims[axis] - 1)
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// Expanding-shell scan. Any cell in shell r is at least (r-1) cells from
    /// the query's clamped cell, so the scan stops once that bound exceeds
    /// the best distance; ties resolve to the lowest segment index.
    fn nearest(&self, p: &Point3<f64>, segments: &[FeatureSegment]) -> (f64, usize) {
        let center: [i64; 3] = std::array::from_fn(|k| self.coord(p[k], k) as i64);
        let max_ring = (0..3)
            .map(|k| center[k].max(self.dims[k] as i64 - 1 - center[k]))
            .max()
            .unwrap();
        let mut seen = vec![false; segments.len()];
        let mut best = (f64::INFINITY, usize::MAX);
        for ring in 0..=max_ring {
            if (ring - 1) as f64 * self.cell > best.0 {
                break;
            }
            self.visit_shell(center, ring, |cell_idx| {
                for &si in &self.cells[cell_idx] {
                    let si = si as usize;
                    if seen[si] {
                        continue;
                    }
                    seen[si] = true;
                    let d = segments[si].distance_to(p);
                    if d < best.0 || (d == best.0 && si < best.1) {
                        best = (d, si);
                    }
                }
            });
        }
        best
    }

    fn visit_shell(&self, center: [i64; 3], ring: i64, mut f: impl FnMut(usize)) {
        for di in -ring..=ring {
            for dj in -ring..=ring {
                for dk in -ring..=ring {
                    if di.abs().max(dj.abs()).max(dk.abs()) != ring {
                        continue;
                    }
                    let c = [center[0] + di, center[1] + dj, center[2] + dk];
                    if (0..3).any(|k| c[k] < 0 || c[k] >= self.dims[k] as i64) {
                        continue;
                    }
                    f(self.flat([c[0] as usize, c[1] as usize, c[2] as usize]));
                }
            }
        }
    }
}

/// Reads feature segments from a text file: one `ax ay az bx by bz` line per
/// segment, `#` comments allowed.
pub fn load_feature_file(path: &Path) -> Result<FeatureSet, MeshError> {
    parse_feature_file(&std::fs::read_to_string(path)?)
}

pub(crate) fn parse_feature_file(text: &str) -> Result<FeatureSet, MeshError> {
    let mut segments = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let nums: Vec<f64> = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("expected a number, found '{tok}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        if nums.len() != 6 {
            return Err(MeshError::Parse {
                line,
                message: format!("expected 6 numbers per segment, found {}", nums.len()),
            });
        }
        let seg = FeatureSegment::new(
            Point3::new(nums[0], nums[1], nums[2]),
            Point3::new(nums[3], nums[4], nums[5]),
        )
        .map_err(|_| MeshError::Parse { line, message: "zero-length segment".into() })?;
        segments.push(seg);
    }
    Ok(FeatureSet::new(segments))
}

/// Writes segments in the same one-line-per-segment format.
pub fn write_feature_file(features: &FeatureSet, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, format_feature_file(features))?;
    Ok(())
}

pub(crate) fn format_feature_file(features: &FeatureSet) -> String {
    let mut out = String::new();
    for s in features.segments() {
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            s.a.x, s.a.y, s.a.z, s.b.x, s.b.y, s.b.z
        );
    }
    out
}
