//! Two independent singularity detectors: continuous extraction by
//! subdividing randomly seeded triangles, and the classical discrete test
//! that composes matchings around each interior tet edge.

use std::collections::HashMap;

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{project_with_sentinel, AnalysisError, DiscreteField, Domain};
use crate::field::FrameField;
use crate::frame::Frame;
use crate::mesh::TetMesh;
use crate::octa::{loop_rotation, OctaRotation};

/// Side length of freshly seeded triangles, in normalized units.
pub const TRIANGLE_SIDE: f64 = 0.1;
/// Frames sampled around a triangle boundary when testing its loop.
pub const LOOP_SAMPLES: usize = 12;
/// Triangles smaller than this stop subdividing and report their centroid.
pub const MIN_TRIANGLE_SIDE: f64 = 1e-3;
/// Default subdivision depth cap.
pub const DEFAULT_MAX_DEPTH: u32 = 8;

// give up seeding when the domain rejects this many consecutive draws
const MAX_REJECTIONS: usize = 10_000;

/// A converged triangle centroid on the singularity graph.
#[derive(Debug, Clone, Copy)]
pub struct SingularPoint {
    pub position: Point3<f64>,
    pub rotation_class: OctaRotation,
    /// Subdivision depth of the generating triangle.
    pub depth: u32,
}

#[derive(Debug, Clone, Default)]
pub struct SingularPointSet {
    pub points: Vec<SingularPoint>,
}

impl SingularPointSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

type Triangle = [Point3<f64>; 3];

fn boundary_points(tri: &Triangle) -> Vec<Point3<f64>> {
    let per_side = LOOP_SAMPLES / 3;
    let mut pts = Vec::with_capacity(LOOP_SAMPLES);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        for j in 0..per_side {
            let t = j as f64 / per_side as f64;
            pts.push(a + (b - a) * t);
        }
    }
    pts
}

// loop class from lenient frames, plus whether every projection converged
fn evaluate_loop<F: FrameField + ?Sized>(field: &F, tri: &Triangle) -> (OctaRotation, bool) {
    let qs = field.coefficients_batch(&boundary_points(tri));
    let mut frames = Vec::with_capacity(qs.len());
    let mut all_ok = true;
    for q in &qs {
        let (frame, ok) = project_with_sentinel(q);
        all_ok &= ok;
        frames.push(frame);
    }
    (loop_rotation(&frames), all_ok)
}

fn split(tri: &Triangle) -> [Triangle; 4] {
    let m01 = nalgebra::center(&tri[0], &tri[1]);
    let m12 = nalgebra::center(&tri[1], &tri[2]);
    let m20 = nalgebra::center(&tri[2], &tri[0]);
    [
        [tri[0], m01, m20],
        [m01, tri[1], m12],
        [m20, m12, tri[2]],
        [m01, m12, m20],
    ]
}

fn refine<F: FrameField + ?Sized>(
    field: &F,
    tri: Triangle,
    depth: u32,
    max_depth: u32,
    out: &mut Vec<SingularPoint>,
) {
    let (class, all_ok) = evaluate_loop(field, &tri);
    // projection failures are treated as suspect and followed down
    if class.is_identity() && all_ok {
        return;
    }
    let side = (tri[0] - tri[1]).norm();
    if depth >= max_depth || side < MIN_TRIANGLE_SIDE {
        if !class.is_identity() {
            let centroid = Point3::from((tri[0].coords + tri[1].coords + tri[2].coords) / 3.0);
            out.push(SingularPoint { position: centroid, rotation_class: class, depth });
        }
        return;
    }
    for child in split(&tri) {
        refine(field, child, depth + 1, max_depth, out);
    }
}

/// Seeds `n_seeds` randomly placed and oriented equilateral triangles in the
/// domain and recursively subdivides the ones whose boundary loop carries a
/// nontrivial rotation. Survivor centroids sample the singularity graph; an
/// empty result means none was found.
pub fn extract_singular_points<F: FrameField + ?Sized>(
    field: &F,
    domain: &Domain,
    n_seeds: usize,
    max_depth: u32,
    rng_seed: u64,
) -> Result<SingularPointSet, AnalysisError> {
    if n_seeds == 0 {
        return Err(AnalysisError::NoSeeds);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (lo, hi) = domain.bbox();
    let mut points = Vec::new();
    for _ in 0..n_seeds {
        let mut center = None;
        for _ in 0..MAX_REJECTIONS {
            let p = Point3::new(
                rng.gen_range(lo.x..=hi.x),
                rng.gen_range(lo.y..=hi.y),
                rng.gen_range(lo.z..=hi.z),
            );
            if domain.contains(&p) {
                center = Some(p);
                break;
            }
        }
        let center = center.ok_or(AnalysisError::EmptyDomain(MAX_REJECTIONS))?;
        // uniform random orientation; vertices on the circumcircle
        let basis = Frame::random(&mut rng);
        let (e1, e2) = (basis.axis(0), basis.axis(1));
        let r = TRIANGLE_SIDE / 3f64.sqrt();
        let tri: Triangle = std::array::from_fn(|k| {
            let angle = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            center + (e1 * angle.cos() + e2 * angle.sin()) * r
        });
        refine(field, tri, 0, max_depth, &mut points);
    }
    Ok(SingularPointSet { points })
}

/// An interior tet edge whose surrounding dual loop composes to a
/// nontrivial rotation.
#[derive(Debug, Clone, Copy)]
pub struct SingularEdge {
    pub verts: [usize; 2],
    pub class: OctaRotation,
}

#[derive(Debug, Clone, Default)]
pub struct SingularEdgeReport {
    pub singular: Vec<SingularEdge>,
    /// Edges with no closed dual loop: boundary edges, plus edges touching
    /// tets whose frame projection failed.
    pub unclassified: Vec<[usize; 2]>,
}

const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b { [a, b] } else { [b, a] }
}

// the two faces of `tet` that contain both edge endpoints
fn faces_on_edge(tet: &[usize; 4], edge: &[usize; 2]) -> [[usize; 3]; 2] {
    let mut found = [[0usize; 3]; 2];
    let mut n = 0;
    for skip in 0..4 {
        let face: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| tet[k]).collect();
        if edge.iter().all(|v| face.contains(v)) {
            let mut f = [face[0], face[1], face[2]];
            f.sort_unstable();
            found[n] = f;
            n += 1;
        }
    }
    debug_assert_eq!(n, 2);
    found
}

/// Composes the octahedral matchings around the closed tet ring of every
/// interior edge. Boundary edges have open rings and are reported as
/// unclassified rather than guessed at.
pub fn classify_singular_edges_discrete(
    field: &DiscreteField,
    mesh: &TetMesh,
) -> SingularEdgeReport {
    assert_eq!(field.frames.len(), mesh.tets().len(), "field does not match the mesh");
    let failed: std::collections::HashSet<usize> = field.failures.iter().copied().collect();

    let mut face_owners: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
    let mut edge_tets: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
    let mut edge_order: Vec<[usize; 2]> = Vec::new();
    for (t, tet) in mesh.tets().iter().enumerate() {
        for skip in 0..4 {
            let mut f: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| tet[k]).collect();
            f.sort_unstable();
            face_owners.entry([f[0], f[1], f[2]]).or_default().push(t);
        }
        for e in &TET_EDGES {
            let key = sorted_pair(tet[e[0]], tet[e[1]]);
            let slot = edge_tets.entry(key).or_default();
            if slot.is_empty() {
                edge_order.push(key);
            }
            slot.push(t);
        }
    }

    let mut report = SingularEdgeReport::default();
    'edges: for edge in edge_order {
        let ring = &edge_tets[&edge];
        if ring.iter().any(|t| failed.contains(t)) || ring.len() < 3 {
            report.unclassified.push(edge);
            continue;
        }
        // walk tet to tet through shared faces until the ring closes
        let start = ring[0];
        let mut ordered = vec![start];
        let mut prev_face: Option<[usize; 3]> = None;
        let mut current = start;
        loop {
            let faces = faces_on_edge(&mesh.tets()[current], &edge);
            let out_face = match prev_face {
                Some(p) if faces[0] == p => faces[1],
                Some(_) => faces[0],
                None => faces[0],
            };
            let owners = &face_owners[&out_face];
            let Some(&next) = owners.iter().find(|&&t| t != current) else {
                // open ring: the edge lies on the surface
                report.unclassified.push(edge);
                continue 'edges;
            };
            if next == start {
                break;
            }
            ordered.push(next);
            prev_face = Some(out_face);
            current = next;
            if ordered.len() > ring.len() {
                report.unclassified.push(edge);
                continue 'edges;
            }
        }
        if ordered.len() != ring.len() {
            report.unclassified.push(edge);
            continue;
        }
        let frames: Vec<Frame> = ordered.iter().map(|&t| field.frames[t].clone()).collect();
        let class = loop_rotation(&frames);
        if !class.is_identity() {
            report.singular.push(SingularEdge { verts: edge, class });
        }
    }
    report
}
