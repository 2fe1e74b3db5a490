//! Surface cross field: per boundary triangle, the volumetric frame with
//! its normal-most axis removed and the remaining two flattened into the
//! tangent plane.

use nalgebra::{Point3, Vector3};

use super::project_with_sentinel;
use crate::field::FrameField;
use crate::frame::Frame;
use crate::mesh::TetMesh;

/// Two normal-axis scores closer than this make the drop ambiguous.
pub const CROSS_TIE_TOL: f64 = 1e-6;

/// A tangent cross: u and v are unit, mutually orthogonal, and orthogonal
/// to the triangle normal.
#[derive(Debug, Clone, Copy)]
pub struct Cross {
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct CrossField {
    /// One cross per boundary triangle, in boundary-face order.
    pub crosses: Vec<Cross>,
    /// Triangles where two axes were equally aligned with the normal; the
    /// tie broke toward the lower axis index.
    pub ambiguous: Vec<usize>,
    /// Triangles whose frame projection failed (sentinel frame used).
    pub failures: Vec<usize>,
}

// split one frame against a normal: cross plus ambiguity flag
fn cross_from_frame(frame: &Frame, normal: &Vector3<f64>) -> (Cross, bool) {
    let scores: [f64; 3] = std::array::from_fn(|i| frame.axis(i).dot(normal).abs());
    let mut drop = 0;
    for i in 1..3 {
        if scores[i] > scores[drop] {
            drop = i;
        }
    }
    let ambiguous = (0..3).any(|i| i != drop && (scores[drop] - scores[i]).abs() < CROSS_TIE_TOL);
    if ambiguous {
        // lowest index among the near-ties wins
        drop = (0..3)
            .find(|&i| (scores[drop] - scores[i]).abs() < CROSS_TIE_TOL)
            .unwrap();
    }
    let kept: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
    let a = frame.axis(kept[0]);
    let b = frame.axis(kept[1]);
    // flatten into the tangent plane, then re-orthonormalize
    let u = (a - normal * a.dot(normal)).normalize();
    let vt = b - normal * b.dot(normal);
    let v = (vt - u * vt.dot(&u)).normalize();
    (Cross { u, v }, ambiguous)
}

/// Samples the field at every boundary-face centroid and reduces each frame
/// to a tangent cross.
pub fn extract_surface_cross_field<F: FrameField + ?Sized>(
    field: &F,
    mesh: &TetMesh,
) -> CrossField {
    let centroids: Vec<Point3<f64>> = mesh
        .boundary_faces()
        .iter()
        .map(|f| {
            let v = mesh.vertices();
            Point3::from(
                (v[f.verts[0]].coords + v[f.verts[1]].coords + v[f.verts[2]].coords) / 3.0,
            )
        })
        .collect();
    let qs = field.coefficients_batch(&centroids);

    let mut crosses = Vec::with_capacity(qs.len());
    let mut ambiguous = Vec::new();
    let mut failures = Vec::new();
    for (i, (q, face)) in qs.iter().zip(mesh.boundary_faces()).enumerate() {
        let (frame, ok) = project_with_sentinel(q);
        if !ok {
            failures.push(i);
        }
        let (cross, tie) = cross_from_frame(&frame, &face.normal);
        if tie {
            ambiguous.push(i);
        }
        crosses.push(cross);
    }
    CrossField { crosses, ambiguous, failures }
}
