//! Built-in test volumes: cube, elongated box, cylinder, and an L-shaped
//! bracket. All are generated watertight and positively oriented.

use std::collections::HashMap;
use std::str::FromStr;

use nalgebra::Point3;

use super::{signed_volume, MeshError, TetMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    /// Unit cube [0,1]^3.
    Cube,
    /// 2 x 1 x 1 box, elongated along x.
    Box,
    /// Radius 0.5, height 1, axis along z.
    Cylinder,
    /// Two unit-square legs: [0,2]x[0,1]x[0,1] joined with [0,1]x[0,1]x[0,2].
    LShape,
}

impl Primitive {
    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Cube => "cube",
            Primitive::Box => "box",
            Primitive::Cylinder => "cylinder",
            Primitive::LShape => "l_shape",
        }
    }
}

impl FromStr for Primitive {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cube" => Ok(Primitive::Cube),
            "box" => Ok(Primitive::Box),
            "cylinder" => Ok(Primitive::Cylinder),
            "l_shape" | "lshape" | "l-shape" => Ok(Primitive::LShape),
            other => Err(MeshError::UnsupportedPrimitive(other.to_string())),
        }
    }
}

/// Generates a primitive at the given resolution (cells per unit length for
/// the lattice shapes; rings, layers, and angular density for the cylinder).
pub fn generate_primitive(primitive: Primitive, resolution: u32) -> Result<TetMesh, MeshError> {
    if resolution == 0 {
        return Err(MeshError::Empty("cells (resolution 0)"));
    }
    let r = resolution as i64;
    match primitive {
        Primitive::Cube => lattice_mesh(r, 1.0 / r as f64, |_, _, _| true, (r, r, r)),
        Primitive::Box => lattice_mesh(r, 1.0 / r as f64, |_, _, _| true, (2 * r, r, r)),
        Primitive::LShape => lattice_mesh(
            r,
            1.0 / r as f64,
            move |i, _, k| k < r || i < r,
            (2 * r, r, 2 * r),
        ),
        Primitive::Cylinder => cylinder_mesh(resolution),
    }
}

struct Lattice {
    map: HashMap<(i64, i64, i64), usize>,
    vertices: Vec<Point3<f64>>,
    h: f64,
}

impl Lattice {
    fn vertex(&mut self, i: i64, j: i64, k: i64) -> usize {
        let h = self.h;
        let vertices = &mut self.vertices;
        *self.map.entry((i, j, k)).or_insert_with(|| {
            vertices.push(Point3::new(i as f64 * h, j as f64 * h, k as f64 * h));
            vertices.len() - 1
        })
    }
}

// the six permutations of (x, y, z); each one is a lattice path 000 -> 111
const AXIS_ORDERS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn push_oriented(vertices: &[Point3<f64>], tets: &mut Vec<[usize; 4]>, mut t: [usize; 4]) {
    if signed_volume(vertices, &t) < 0.0 {
        t.swap(2, 3);
    }
    tets.push(t);
}

/// Fills the predicate-selected cells of a `dims` grid with six tets each.
/// Identical diagonals in every cell keep shared faces conforming.
fn lattice_mesh(
    _res: i64,
    h: f64,
    include: impl Fn(i64, i64, i64) -> bool,
    dims: (i64, i64, i64),
) -> Result<TetMesh, MeshError> {
    let mut lat = Lattice { map: HashMap::new(), vertices: Vec::new(), h };
    let mut tets = Vec::new();
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                if !include(i, j, k) {
                    continue;
                }
                for order in &AXIS_ORDERS {
                    let mut corner = [i, j, k];
                    let mut t = [lat.vertex(i, j, k), 0, 0, 0];
                    for (step, &axis) in order.iter().enumerate() {
                        corner[axis] += 1;
                        t[step + 1] = lat.vertex(corner[0], corner[1], corner[2]);
                    }
                    push_oriented(&lat.vertices, &mut tets, t);
                }
            }
        }
    }
    TetMesh::from_parts(lat.vertices, tets)
}

fn cylinder_mesh(resolution: u32) -> Result<TetMesh, MeshError> {
    const RADIUS: f64 = 0.5;
    const HEIGHT: f64 = 1.0;
    let res = resolution as usize;
    let n = 6 * res; // vertices per ring
    let layer_stride = 1 + res * n;

    let mut vertices = Vec::with_capacity((res + 1) * layer_stride);
    for layer in 0..=res {
        let z = HEIGHT * layer as f64 / res as f64;
        vertices.push(Point3::new(0.0, 0.0, z));
        for ring in 1..=res {
            let radius = RADIUS * ring as f64 / res as f64;
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vertices.push(Point3::new(radius * theta.cos(), radius * theta.sin(), z));
            }
        }
    }
    let at = |layer: usize, ring: usize, i: usize| -> usize {
        debug_assert!(ring >= 1);
        layer * layer_stride + 1 + (ring - 1) * n + i % n
    };
    let center = |layer: usize| -> usize { layer * layer_stride };

    // one counter-clockwise disk triangulation, reused by every layer
    let mut disk: Vec<[usize; 3]> = Vec::new(); // offsets within a layer
    for i in 0..n {
        disk.push([center(0), at(0, 1, i), at(0, 1, i + 1)]);
    }
    for ring in 1..res {
        for i in 0..n {
            let (p, q, r, s) = (
                at(0, ring, i),
                at(0, ring + 1, i),
                at(0, ring + 1, i + 1),
                at(0, ring, i + 1),
            );
            // cut each quad through its lowest-indexed corner
            if p.min(r) < q.min(s) {
                disk.push([p, q, r]);
                disk.push([p, r, s]);
            } else {
                disk.push([q, r, s]);
                disk.push([q, s, p]);
            }
        }
    }

    let mut tets = Vec::with_capacity(3 * disk.len() * res);
    for layer in 0..res {
        let lo = layer * layer_stride;
        let hi = (layer + 1) * layer_stride;
        for tri in &disk {
            let bottom = [tri[0] + lo, tri[1] + lo, tri[2] + lo];
            let top = [tri[0] + hi, tri[1] + hi, tri[2] + hi];
            split_prism(&vertices, &mut tets, bottom, top);
        }
    }
    TetMesh::from_parts(vertices, tets)
}

/// Cuts a triangular prism into three tets. Every quad face takes the
/// diagonal through its lowest-indexed vertex, so face-adjacent prisms agree.
fn split_prism(
    vertices: &[Point3<f64>],
    tets: &mut Vec<[usize; 4]>,
    bottom: [usize; 3],
    top: [usize; 3],
) {
    // relabel so the prism's lowest-indexed vertex is b[0]; both diagonals
    // adjacent to it then run through it
    let all = [bottom[0], bottom[1], bottom[2], top[0], top[1], top[2]];
    let lowest = (0..6).min_by_key(|&i| all[i]).unwrap();
    let (mut b, mut t) = (bottom, top);
    if lowest >= 3 {
        std::mem::swap(&mut b, &mut t);
    }
    let rot = lowest % 3;
    let b = [b[rot], b[(rot + 1) % 3], b[(rot + 2) % 3]];
    let t = [t[rot], t[(rot + 1) % 3], t[(rot + 2) % 3]];

    // remaining quad (b1, b2, t2, t1): same lowest-vertex diagonal rule
    if b[1].min(t[2]) < b[2].min(t[1]) {
        push_oriented(vertices, tets, [b[0], b[1], b[2], t[2]]);
        push_oriented(vertices, tets, [b[0], b[1], t[2], t[1]]);
    } else {
        push_oriented(vertices, tets, [b[0], b[1], b[2], t[1]]);
        push_oriented(vertices, tets, [b[0], b[2], t[2], t[1]]);
    }
    push_oriented(vertices, tets, [b[0], t[1], t[2], t[0]]);
}
