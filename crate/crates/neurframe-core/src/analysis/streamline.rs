//! Streamline tracing through the frame field, in the volume and along the
//! boundary surface.

use nalgebra::{Point3, Rotation3, Unit, Vector3};

use super::Domain;
use crate::field::FrameField;
use crate::frame::Frame;
use crate::mesh::TetMesh;
use crate::sh::project::project_to_frame;

pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_MAX_STEPS: usize = 2000;

// minimum useful progress per surface step before trying to fold the
// direction across an edge
const PROGRESS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    DomainExit,
    MaxSteps,
    /// Frame projection failed, or the surface projection stopped making
    /// progress (a corner with no continuation).
    ProjectionFailure,
}

#[derive(Debug, Clone)]
pub struct Streamline {
    pub points: Vec<Point3<f64>>,
    pub seed: Point3<f64>,
    pub reason: StopReason,
}

#[derive(Debug, Clone, Copy)]
pub struct StreamlineOptions {
    pub step: f64,
    pub max_steps: usize,
    /// Tracking direction for the first step; the frame's first axis when
    /// absent.
    pub initial_direction: Option<Vector3<f64>>,
}

impl Default for StreamlineOptions {
    fn default() -> Self {
        StreamlineOptions {
            step: DEFAULT_STEP,
            max_steps: DEFAULT_MAX_STEPS,
            initial_direction: None,
        }
    }
}

/// The signed frame axis with the largest dot product against `dir`. The
/// choice only depends on the direction of `dir`, not its length; ties keep
/// the first axis in signed order (+0, -0, +1, -1, +2, -2).
pub fn best_axis(frame: &Frame, dir: &Vector3<f64>) -> Vector3<f64> {
    let mut best = frame.axis(0);
    let mut best_dot = f64::NEG_INFINITY;
    for axis in frame.signed_axes() {
        let d = axis.dot(dir);
        if d > best_dot {
            best_dot = d;
            best = axis;
        }
    }
    best
}

/// Advances from `seed` along the locally best-aligned frame axis until the
/// domain is left, `max_steps` is reached, or projection fails. Points are
/// exactly `step` apart.
pub fn trace_streamline<F: FrameField + ?Sized>(
    field: &F,
    domain: &Domain,
    seed: Point3<f64>,
    options: &StreamlineOptions,
) -> Streamline {
    let mut points = vec![seed];
    let mut p = seed;
    let mut dir = options.initial_direction.and_then(|d| d.try_normalize(1e-12));
    let mut reason = StopReason::MaxSteps;
    for _ in 0..options.max_steps {
        let Ok(frame) = project_to_frame(&field.coefficients(&p)) else {
            reason = StopReason::ProjectionFailure;
            break;
        };
        let tracking = dir.unwrap_or_else(|| frame.axis(0));
        let axis = best_axis(&frame, &tracking);
        let next = p + axis * options.step;
        if !domain.contains(&next) {
            reason = StopReason::DomainExit;
            break;
        }
        points.push(next);
        p = next;
        dir = Some(axis);
    }
    Streamline { points, seed, reason }
}

// Ericson's closest-point-on-triangle, by barycentric region
fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

struct Surface<'a> {
    mesh: &'a TetMesh,
}

impl Surface<'_> {
    fn face_closest(&self, face: usize, p: &Point3<f64>) -> Point3<f64> {
        let f = &self.mesh.boundary_faces()[face];
        let v = self.mesh.vertices();
        closest_point_on_triangle(p, &v[f.verts[0]], &v[f.verts[1]], &v[f.verts[2]])
    }

    // nearest boundary triangle; ties keep the lowest face index
    fn closest(&self, p: &Point3<f64>) -> (Point3<f64>, usize) {
        let mut best = (Point3::origin(), usize::MAX);
        let mut best_d = f64::INFINITY;
        for face in 0..self.mesh.boundary_faces().len() {
            let q = self.face_closest(face, p);
            let d = (q - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = (q, face);
            }
        }
        best
    }

    // every face this on-surface point lies on (edges and corners have
    // several); used to fold directions across sharp edges
    fn faces_at(&self, p: &Point3<f64>) -> Vec<usize> {
        (0..self.mesh.boundary_faces().len())
            .filter(|&f| (self.face_closest(f, p) - p).norm_squared() <= 1e-24)
            .collect()
    }

    fn normal(&self, face: usize) -> Vector3<f64> {
        self.mesh.boundary_faces()[face].normal
    }
}

// drop the axis most parallel to the normal, keep the 4 signed tangent
// candidates in axis order
fn tangent_candidates(frame: &Frame, normal: &Vector3<f64>) -> [Vector3<f64>; 4] {
    let scores: Vec<f64> = (0..3).map(|i| frame.axis(i).dot(normal).abs()).collect();
    let drop = (0..3)
        .max_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap())
        .unwrap();
    let kept: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
    [
        frame.axis(kept[0]),
        -frame.axis(kept[0]),
        frame.axis(kept[1]),
        -frame.axis(kept[1]),
    ]
}

fn pick(candidates: &[Vector3<f64>; 4], dir: &Vector3<f64>) -> Vector3<f64> {
    let mut best = candidates[0];
    let mut best_dot = f64::NEG_INFINITY;
    for c in candidates {
        let d = c.dot(dir);
        if d > best_dot {
            best_dot = d;
            best = *c;
        }
    }
    best
}

/// Traces along the boundary surface: the axis most parallel to the local
/// normal is dropped, the step is taken in the best tangent axis, and the
/// point is pulled back onto the nearest triangle. Across a sharp edge the
/// tracking direction is folded (rotated with the normal), which continues
/// straight runs as geodesics and produces the right-angle turns of an
/// axis-aligned field on a box.
pub fn trace_streamline_on_surface<F: FrameField + ?Sized>(
    field: &F,
    mesh: &TetMesh,
    seed: Point3<f64>,
    options: &StreamlineOptions,
) -> Streamline {
    let surface = Surface { mesh };
    let (mut p, mut face) = surface.closest(&seed);
    let mut points = vec![p];
    let mut dir = options.initial_direction.and_then(|d| d.try_normalize(1e-12));
    let mut reason = StopReason::MaxSteps;

    'steps: for _ in 0..options.max_steps {
        let Ok(frame) = project_to_frame(&field.coefficients(&p)) else {
            reason = StopReason::ProjectionFailure;
            break;
        };
        let n = surface.normal(face);
        let tracking = dir.unwrap_or_else(|| tangent_candidates(&frame, &n)[0]);

        // try the current face's normal first, then fold across any other
        // face meeting p until a step makes progress
        let mut attempts = vec![(n, tracking)];
        for other in surface.faces_at(&p) {
            if other == face {
                continue;
            }
            let n2 = surface.normal(other);
            let axis = n.cross(&n2);
            let s = axis.norm();
            if s < 1e-12 {
                continue;
            }
            let angle = s.atan2(n.dot(&n2));
            let folded = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle) * tracking;
            attempts.push((n2, folded));
        }
        for (normal, d) in attempts {
            let c = pick(&tangent_candidates(&frame, &normal), &d);
            let (proj, new_face) = surface.closest(&(p + c * options.step));
            let moved = proj - p;
            if moved.norm() >= PROGRESS_EPS {
                points.push(proj);
                dir = moved.try_normalize(1e-12).or(Some(c));
                p = proj;
                face = new_face;
                continue 'steps;
            }
        }
        // no candidate could leave this point
        reason = StopReason::ProjectionFailure;
        break;
    }
    Streamline { points, seed, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ValenceThreeField;
    use crate::mesh::{generate_primitive, normalize_to_unit_box, Primitive};
    use crate::sh::canonical_sh;
    use crate::sh::ShVec;

    struct Constant;
    impl FrameField for Constant {
        fn coefficients(&self, _: &Point3<f64>) -> ShVec {
            canonical_sh()
        }
    }

    #[test]
    fn axis_selection_is_an_argmax_over_signed_axes() {
        let f = Frame::identity();
        let d = Vector3::new(0.9, 0.1, 0.0).normalize();
        assert_eq!(best_axis(&f, &d), Vector3::x());
        assert_eq!(best_axis(&f, &-d), -Vector3::x());
        assert_eq!(best_axis(&f, &Vector3::new(0.1, -0.2, 0.9)), Vector3::z());
        // scaling the direction never changes the winner
        for scale in [1e-6, 1.0, 42.0, 1e9] {
            assert_eq!(best_axis(&f, &(d * scale)), Vector3::x());
        }
    }

    #[test]
    fn constant_field_runs_straight_until_max_steps() {
        let domain =
            Domain::from_bbox(Point3::new(-100.0, -100.0, -100.0), Point3::new(100.0, 100.0, 100.0));
        let options = StreamlineOptions {
            max_steps: 50,
            initial_direction: Some(Vector3::x()),
            ..StreamlineOptions::default()
        };
        let line = trace_streamline(&Constant, &domain, Point3::origin(), &options);
        assert_eq!(line.reason, StopReason::MaxSteps);
        assert_eq!(line.points.len(), 51);
        let last = line.points.last().unwrap();
        assert!((last.x - 0.5).abs() < 1e-12);
        assert!(last.y == 0.0 && last.z == 0.0);
        for pair in line.points.windows(2) {
            assert!(((pair[1] - pair[0]).norm() - options.step).abs() < 1e-12);
        }
    }

    #[test]
    fn leaving_the_box_stops_the_trace() {
        let domain = Domain::from_bbox(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        // 1/64 is exactly representable, so the accumulated positions hit the
        // inclusive upper bound exactly before the next step exits
        let options = StreamlineOptions {
            step: 1.0 / 64.0,
            initial_direction: Some(Vector3::x()),
            ..StreamlineOptions::default()
        };
        let line = trace_streamline(&Constant, &domain, Point3::origin(), &options);
        assert_eq!(line.reason, StopReason::DomainExit);
        let last = line.points.last().unwrap();
        assert_eq!(last.x, 1.0, "stopped at {last:?}");
        assert_eq!(line.points.len(), 65);
    }

    #[test]
    fn missing_initial_direction_follows_the_first_axis() {
        let domain = Domain::from_bbox(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let options = StreamlineOptions { max_steps: 10, ..StreamlineOptions::default() };
        let line = trace_streamline(&Constant, &domain, Point3::origin(), &options);
        assert!(line.points.last().unwrap().x > 0.09);
    }

    #[test]
    fn projection_failure_is_reported() {
        struct Zero;
        impl FrameField for Zero {
            fn coefficients(&self, _: &Point3<f64>) -> ShVec {
                ShVec::zeros()
            }
        }
        let domain = Domain::from_bbox(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let line =
            trace_streamline(&Zero, &domain, Point3::origin(), &StreamlineOptions::default());
        assert_eq!(line.reason, StopReason::ProjectionFailure);
        assert_eq!(line.points.len(), 1);
    }

    #[test]
    fn closest_point_on_triangle_beats_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut rand_point = |s: f64| {
            Point3::new(
                rng.gen_range(-s..s),
                rng.gen_range(-s..s),
                rng.gen_range(-s..s),
            )
        };
        for _ in 0..50 {
            let (a, b, c) = (rand_point(1.0), rand_point(1.0), rand_point(1.0));
            let p = rand_point(2.0);
            let q = closest_point_on_triangle(&p, &a, &b, &c);
            let best = (q - p).norm();
            let n = 40;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    let sample = a + (b - a) * u + (c - a) * v;
                    assert!((sample - p).norm() >= best - 1e-9);
                }
            }
        }
    }

    #[test]
    fn surface_trace_hugs_the_cube_and_turns_at_edges() {
        let mesh = generate_primitive(Primitive::Cube, 2).unwrap();
        let (mesh, _) = normalize_to_unit_box(mesh).unwrap();
        let options = StreamlineOptions {
            max_steps: 500,
            initial_direction: Some(Vector3::x()),
            ..StreamlineOptions::default()
        };
        // start on the top face, off the lattice lines
        let seed = Point3::new(0.3, 0.1, 1.0);
        let line = trace_streamline_on_surface(&Constant, &mesh, seed, &options);
        assert_eq!(line.reason, StopReason::MaxSteps);

        let surface = Surface { mesh: &mesh };
        for p in &line.points {
            let (q, _) = surface.closest(p);
            assert!((q - p).norm() < 1e-6, "point {p:?} drifted off the surface");
        }
        for pair in line.points.windows(2) {
            assert!((pair[1] - pair[0]).norm() <= options.step + 1e-12);
        }
        // crossing the x = 1 edge turns the trace by about 90 degrees
        let mut turns = 0;
        let dirs: Vec<Vector3<f64>> = line
            .points
            .windows(2)
            .filter(|w| (w[1] - w[0]).norm() > 1e-6)
            .map(|w| (w[1] - w[0]).normalize())
            .collect();
        for pair in dirs.windows(2) {
            if pair[0].dot(&pair[1]) < 0.5 {
                turns += 1;
            }
        }
        assert!(turns >= 2, "saw {turns} right-angle turns");
        // descending the far face means reaching well below the top rim
        assert!(line.points.iter().any(|p| p.z < 0.0));
    }

    #[test]
    fn tangent_candidates_drop_the_normal_axis() {
        let frame = Frame::identity();
        let candidates = tangent_candidates(&frame, &Vector3::z());
        assert_eq!(candidates[0], Vector3::x());
        assert_eq!(candidates[1], -Vector3::x());
        assert_eq!(candidates[2], Vector3::y());
        assert_eq!(candidates[3], -Vector3::y());
    }

    #[test]
    fn volume_trace_through_the_singular_field_stays_bounded() {
        // the analytic fixture is smooth away from the axis; a trace seeded
        // off-axis keeps stepping until it leaves the box
        let domain = Domain::from_bbox(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let line = trace_streamline(
            &ValenceThreeField,
            &domain,
            Point3::new(0.5, 0.2, 0.0),
            &StreamlineOptions::default(),
        );
        assert!(matches!(line.reason, StopReason::DomainExit | StopReason::MaxSteps));
        assert!(line.points.len() > 10);
    }
}
