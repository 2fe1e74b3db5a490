//! Tetrahedral meshes and the sample sets the losses consume: centroids,
//! dual edges with weights, boundary samples with outward normals, and
//! feature edges.

pub mod features;
pub mod medit;
pub mod obj;
pub mod primitives;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use thiserror::Error;

pub use features::{
    detect_features, feature_distance, load_feature_file, write_feature_file, FeatureSegment,
    FeatureSet,
};
pub use medit::{load_tet_mesh, write_tet_mesh};
pub use obj::{load_obj_polylines, write_obj_polylines};
pub use primitives::{generate_primitive, Primitive};

/// Softening length added to dual-edge lengths before inversion, so weights
/// stay finite even for near-coincident centroids (normalized units).
pub const DUAL_EDGE_TAU: f64 = 1e-2;

/// Dihedral-angle threshold above which a boundary edge counts as a feature.
pub const FEATURE_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no {0}")]
    Empty(&'static str),
    #[error("tets with nonpositive volume: {0:?}")]
    InvertedTets(Vec<usize>),
    #[error("face {verts:?} is shared by more than two tets")]
    NonManifoldFace { verts: [usize; 3] },
    #[error("boundary edge ({a}, {b}) touches {count} boundary faces")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("tet {tet} still has {faces} boundary faces after {rounds} subdivision rounds")]
    SubdivisionStuck { tet: usize, faces: usize, rounds: usize },
    #[error("tet {tet} touches {faces} boundary faces; subdivide before sampling the boundary")]
    MultiBoundaryTet { tet: usize, faces: usize },
    #[error("bounding box is degenerate (extent {0:.3e})")]
    DegenerateBbox(f64),
    #[error("unsupported primitive '{0}'")]
    UnsupportedPrimitive(String),
}

/// One triangle of the surface: its owning tet, vertex indices ordered
/// counter-clockwise seen from outside, and the outward unit normal.
#[derive(Debug, Clone)]
pub struct BoundaryFace {
    pub tet: usize,
    pub verts: [usize; 3],
    pub normal: Vector3<f64>,
}

/// Validated tetrahedral mesh: positive tet volumes, manifold face structure,
/// recomputed outward boundary normals.
#[derive(Debug, Clone)]
pub struct TetMesh {
    vertices: Vec<Point3<f64>>,
    tets: Vec<[usize; 4]>,
    boundary_faces: Vec<BoundaryFace>,
}

pub(crate) fn signed_volume(v: &[Point3<f64>], t: &[usize; 4]) -> f64 {
    let a = v[t[1]] - v[t[0]];
    let b = v[t[2]] - v[t[0]];
    let c = v[t[3]] - v[t[0]];
    a.cross(&b).dot(&c) / 6.0
}

// face f of a tet lists the 3 vertices opposite to corner f
const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

impl TetMesh {
    /// Builds and validates a mesh from raw vertex and tet lists.
    pub fn from_parts(vertices: Vec<Point3<f64>>, tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::Empty("vertices"));
        }
        if tets.is_empty() {
            return Err(MeshError::Empty("tets"));
        }
        for (i, t) in tets.iter().enumerate() {
            for &v in t {
                if v >= vertices.len() {
                    return Err(MeshError::Parse {
                        line: 0,
                        message: format!("tet {i} references missing vertex {v}"),
                    });
                }
            }
        }

        let diag = {
            let (lo, hi) = bbox_of(&vertices);
            (hi - lo).norm()
        };
        let vol_floor = 1e-14 * diag.powi(3);
        let inverted: Vec<usize> = tets
            .iter()
            .enumerate()
            .filter(|(_, t)| signed_volume(&vertices, t) <= vol_floor)
            .map(|(i, _)| i)
            .collect();
        if !inverted.is_empty() {
            return Err(MeshError::InvertedTets(inverted));
        }

        // census: a face seen once is boundary, twice is interior, more is broken
        let mut seen: HashMap<[usize; 3], (usize, usize, usize)> = HashMap::new();
        for (ti, t) in tets.iter().enumerate() {
            for (fi, f) in TET_FACES.iter().enumerate() {
                let key = sorted3([t[f[0]], t[f[1]], t[f[2]]]);
                let entry = seen.entry(key).or_insert((0, ti, fi));
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(MeshError::NonManifoldFace { verts: key });
                }
            }
        }

        let mut boundary_faces = Vec::new();
        for (ti, t) in tets.iter().enumerate() {
            for f in &TET_FACES {
                let raw = [t[f[0]], t[f[1]], t[f[2]]];
                let key = sorted3(raw);
                if seen[&key].0 == 1 {
                    boundary_faces.push(orient_outward(&vertices, t, raw, ti));
                }
            }
        }

        // a closed surface crosses each of its edges exactly twice
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for bf in &boundary_faces {
            for k in 0..3 {
                let (a, b) = (bf.verts[k], bf.verts[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            if count != 2 {
                return Err(MeshError::NonManifoldEdge { a, b, count });
            }
        }

        Ok(TetMesh { vertices, tets, boundary_faces })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn tet_centroid(&self, i: usize) -> Point3<f64> {
        let t = &self.tets[i];
        Point3::from(
            (self.vertices[t[0]].coords
                + self.vertices[t[1]].coords
                + self.vertices[t[2]].coords
                + self.vertices[t[3]].coords)
                / 4.0,
        )
    }

    pub fn tet_volume(&self, i: usize) -> f64 {
        signed_volume(&self.vertices, &self.tets[i])
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|i| self.tet_volume(i)).sum()
    }

    pub fn bbox(&self) -> (Point3<f64>, Point3<f64>) {
        bbox_of(&self.vertices)
    }

    /// Number of boundary faces on each tet.
    pub fn boundary_face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.tets.len()];
        for bf in &self.boundary_faces {
            counts[bf.tet] += 1;
        }
        counts
    }
}

fn bbox_of(vertices: &[Point3<f64>]) -> (Point3<f64>, Point3<f64>) {
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

fn orient_outward(
    vertices: &[Point3<f64>],
    tet: &[usize; 4],
    raw: [usize; 3],
    ti: usize,
) -> BoundaryFace {
    let opposite = tet
        .iter()
        .copied()
        .find(|v| !raw.contains(v))
        .expect("tet face has an opposite corner");
    let (a, b, c) = (vertices[raw[0]], vertices[raw[1]], vertices[raw[2]]);
    let mut verts = raw;
    let mut n = (b - a).cross(&(c - a));
    if n.dot(&(vertices[opposite] - a)) > 0.0 {
        verts.swap(1, 2);
        n = -n;
    }
    BoundaryFace { tet: ti, verts, normal: n.normalize() }
}

/// Splits every tet touching two or more boundary faces at its barycenter
/// (1 → 4) until each tet touches at most one; volume is conserved.
pub fn subdivide_multi_boundary_tets(mesh: TetMesh) -> Result<TetMesh, MeshError> {
    const MAX_ROUNDS: usize = 8;
    let mut mesh = mesh;
    for _ in 0..MAX_ROUNDS {
        let counts = mesh.boundary_face_counts();
        if counts.iter().all(|&c| c <= 1) {
            return Ok(mesh);
        }
        let mut vertices = mesh.vertices.clone();
        let mut tets = Vec::with_capacity(mesh.tets.len() + 3 * counts.iter().filter(|&&c| c > 1).count());
        for (ti, t) in mesh.tets.iter().enumerate() {
            if counts[ti] <= 1 {
                tets.push(*t);
                continue;
            }
            let m = vertices.len();
            vertices.push(mesh.tet_centroid(ti));
            // replacing each corner by the barycenter keeps orientation
            for k in 0..4 {
                let mut child = *t;
                child[k] = m;
                tets.push(child);
            }
        }
        mesh = TetMesh::from_parts(vertices, tets)?;
    }
    let counts = mesh.boundary_face_counts();
    let (tet, faces) = counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(i, &c)| (i, c))
        .unwrap();
    Err(MeshError::SubdivisionStuck { tet, faces, rounds: MAX_ROUNDS })
}

/// Uniform scale and shift taking the input bbox into [−1,1]³ with the
/// longest axis spanning it exactly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormalizeTransform {
    pub scale: f64,
    pub center: [f64; 3],
}

impl NormalizeTransform {
    pub fn identity() -> Self {
        NormalizeTransform { scale: 1.0, center: [0.0; 3] }
    }

    pub fn to_normalized(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::new(
            (p.x - self.center[0]) * self.scale,
            (p.y - self.center[1]) * self.scale,
            (p.z - self.center[2]) * self.scale,
        )
    }

    pub fn to_input(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::new(
            p.x / self.scale + self.center[0],
            p.y / self.scale + self.center[1],
            p.z / self.scale + self.center[2],
        )
    }
}

/// Centers the mesh and scales it uniformly so the longest bbox axis spans
/// exactly [−1,1]; returns the transform for mapping results back.
pub fn normalize_to_unit_box(mesh: TetMesh) -> Result<(TetMesh, NormalizeTransform), MeshError> {
    let (lo, hi) = mesh.bbox();
    let extent = hi - lo;
    let longest = extent.max();
    if longest < 1e-12 {
        return Err(MeshError::DegenerateBbox(longest));
    }
    let transform = NormalizeTransform {
        scale: 2.0 / longest,
        center: [
            (lo.x + hi.x) / 2.0,
            (lo.y + hi.y) / 2.0,
            (lo.z + hi.z) / 2.0,
        ],
    };
    let vertices = mesh
        .vertices
        .iter()
        .map(|p| transform.to_normalized(p))
        .collect();
    let normalized = TetMesh::from_parts(vertices, mesh.tets)?;
    Ok((normalized, transform))
}

/// One edge of the dual graph: face-adjacent tets i and j, the distance
/// between their centroids, and the inverse-length weight.
#[derive(Debug, Clone, Copy)]
pub struct DualEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub weight: f64,
}

/// Tet centroids and the dual edges joining face-adjacent tets.
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub centroids: Vec<Point3<f64>>,
    pub edges: Vec<DualEdge>,
}

/// One dual edge per interior face; weights 1/(length + τ).
pub fn build_dual_graph(mesh: &TetMesh) -> DualGraph {
    let centroids: Vec<Point3<f64>> = (0..mesh.tets.len()).map(|i| mesh.tet_centroid(i)).collect();
    // first-seen map keeps edge order deterministic regardless of hasher
    let mut first: HashMap<[usize; 3], usize> = HashMap::new();
    let mut edges = Vec::new();
    for (ti, t) in mesh.tets.iter().enumerate() {
        for f in &TET_FACES {
            let key = sorted3([t[f[0]], t[f[1]], t[f[2]]]);
            match first.get(&key) {
                None => {
                    first.insert(key, ti);
                }
                Some(&tj) => {
                    let length = (centroids[ti] - centroids[tj]).norm();
                    edges.push(DualEdge {
                        a: tj,
                        b: ti,
                        length,
                        weight: 1.0 / (length + DUAL_EDGE_TAU),
                    });
                }
            }
        }
    }
    DualGraph { centroids, edges }
}

/// One sample per boundary tet: its centroid paired with the outward normal
/// of its single boundary face, plus the owning tet index.
#[derive(Debug, Clone)]
pub struct BoundarySamples {
    pub points: Vec<Point3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub tets: Vec<usize>,
}

/// Collects (centroid, outward normal) pairs from boundary tets. Requires
/// every tet to touch at most one boundary face, i.e. a subdivided mesh.
pub fn boundary_samples(mesh: &TetMesh) -> Result<BoundarySamples, MeshError> {
    let counts = mesh.boundary_face_counts();
    if let Some((tet, &faces)) = counts.iter().enumerate().find(|(_, &c)| c > 1) {
        return Err(MeshError::MultiBoundaryTet { tet, faces });
    }
    let mut points = Vec::with_capacity(mesh.boundary_faces.len());
    let mut normals = Vec::with_capacity(mesh.boundary_faces.len());
    let mut tets = Vec::with_capacity(mesh.boundary_faces.len());
    for bf in &mesh.boundary_faces {
        points.push(mesh.tet_centroid(bf.tet));
        normals.push(bf.normal);
        tets.push(bf.tet);
    }
    Ok(BoundarySamples { points, normals, tets })
}

/// Everything training needs, in normalized coordinates.
#[derive(Debug, Clone)]
pub struct PreprocessedMesh {
    pub mesh: TetMesh,
    pub transform: NormalizeTransform,
    pub dual: DualGraph,
    pub boundary: BoundarySamples,
    pub features: FeatureSet,
}

/// Canonical preprocessing order: normalize, subdivide multi-boundary tets,
/// then derive the dual graph, boundary samples, and features. A
/// user-supplied feature set (in input coordinates) overrides detection.
pub fn preprocess(
    mesh: TetMesh,
    user_features: Option<FeatureSet>,
    feature_angle: f64,
) -> Result<PreprocessedMesh, MeshError> {
    let (mesh, transform) = normalize_to_unit_box(mesh)?;
    let mesh = subdivide_multi_boundary_tets(mesh)?;
    let dual = build_dual_graph(&mesh);
    let boundary = boundary_samples(&mesh)?;
    let features = match user_features {
        Some(f) => f.transformed(&transform),
        None => detect_features(&mesh, feature_angle),
    };
    Ok(PreprocessedMesh { mesh, transform, dual, boundary, features })
}
