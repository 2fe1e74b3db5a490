//! The 24-element rotation group of the cube: signed axis permutations with
//! determinant +1. Elements are indices into a fixed table; composition and
//! inversion are table lookups.

use std::sync::LazyLock;

use nalgebra::Matrix3;

use crate::frame::Frame;

/// One of the 24 rotations mapping the axis cross {±x, ±y, ±z} to itself.
/// Index 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OctaRotation(u8);

pub const GROUP_ORDER: usize = 24;

struct Tables {
    mats: Vec<Matrix3<f64>>,
    compose: [[u8; GROUP_ORDER]; GROUP_ORDER],
    inverse: [u8; GROUP_ORDER],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut mats = Vec::with_capacity(GROUP_ORDER);
    for perm in perms {
        for bits in 0..8u8 {
            let mut m = Matrix3::<f64>::zeros();
            for col in 0..3 {
                let sign = if bits & (1 << col) == 0 { 1.0 } else { -1.0 };
                m[(perm[col], col)] = sign;
            }
            if (m.determinant() - 1.0).abs() < 0.5 {
                mats.push(m);
            }
        }
    }
    assert_eq!(mats.len(), GROUP_ORDER);
    // identity must come first so index 0 is the neutral element
    assert_eq!(mats[0], Matrix3::identity());

    let find = |m: &Matrix3<f64>| -> u8 {
        for (i, g) in mats.iter().enumerate() {
            if (m - g).iter().all(|v| v.abs() < 0.5) {
                return i as u8;
            }
        }
        unreachable!("product left the group");
    };
    let mut compose = [[0u8; GROUP_ORDER]; GROUP_ORDER];
    let mut inverse = [0u8; GROUP_ORDER];
    for a in 0..GROUP_ORDER {
        inverse[a] = find(&mats[a].transpose());
        for b in 0..GROUP_ORDER {
            compose[a][b] = find(&(mats[a] * mats[b]));
        }
    }
    Tables { mats, compose, inverse }
});

impl OctaRotation {
    pub fn identity() -> Self {
        OctaRotation(0)
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < GROUP_ORDER).then_some(OctaRotation(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = OctaRotation> {
        (0..GROUP_ORDER as u8).map(OctaRotation)
    }

    pub fn matrix(self) -> &'static Matrix3<f64> {
        &TABLES.mats[self.0 as usize]
    }

    /// Group product self·other.
    pub fn compose(self, other: OctaRotation) -> OctaRotation {
        OctaRotation(TABLES.compose[self.0 as usize][other.0 as usize])
    }

    pub fn inverse(self) -> OctaRotation {
        OctaRotation(TABLES.inverse[self.0 as usize])
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// Rotation angle of the element (0, π/2, 2π/3 or π).
    pub fn angle(self) -> f64 {
        let c = ((self.matrix().trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Smallest k ≥ 1 with self^k = identity.
    pub fn order(self) -> usize {
        let mut acc = self;
        for k in 1..=4 {
            if acc.is_identity() {
                return k;
            }
            acc = acc.compose(self);
        }
        // every element of the group has order 1, 2, 3 or 4
        unreachable!()
    }
}

/// The group element g minimizing the rotation angle between fa·g and fb.
/// Ties resolve to the smallest index.
pub fn octahedral_matching(fa: &Frame, fb: &Frame) -> OctaRotation {
    // minimizing the angle of (fa·g)ᵀ·fb maximizes trace(gᵀ·faᵀ·fb)
    let m = fa.matrix().transpose() * fb.matrix();
    let mut best = OctaRotation(0);
    let mut best_score = f64::NEG_INFINITY;
    for g in OctaRotation::all() {
        let score = g.matrix().dot(&m);
        if score > best_score {
            best_score = score;
            best = g;
        }
    }
    best
}

/// Composes the octahedral matchings along a closed loop of frames
/// (including the closing match from the last frame back to the first).
/// Identity means the loop carries no singularity.
pub fn loop_rotation(frames: &[Frame]) -> OctaRotation {
    assert!(frames.len() >= 3, "a loop needs at least 3 frames");
    let mut acc = OctaRotation::identity();
    for i in 0..frames.len() {
        let a = &frames[i];
        let b = &frames[(i + 1) % frames.len()];
        acc = acc.compose(octahedral_matching(a, b));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_closure_and_inverses() {
        for a in OctaRotation::all() {
            assert!(a.compose(a.inverse()).is_identity());
            for b in OctaRotation::all() {
                let c = a.compose(b);
                assert_eq!(c.matrix(), &(a.matrix() * b.matrix()));
            }
        }
    }

    #[test]
    fn identity_is_index_zero() {
        assert!(OctaRotation::identity().is_identity());
        assert_eq!(OctaRotation::identity().matrix(), &Matrix3::identity());
    }

    #[test]
    fn element_orders() {
        let mut counts = [0usize; 5];
        for g in OctaRotation::all() {
            counts[g.order()] += 1;
        }
        // 1 identity, 9 half-turns+quarter-turns of order 2/4 split as 9+6, 8 of order 3
        assert_eq!(counts[1], 1);
        assert_eq!(counts[2], 9);
        assert_eq!(counts[3], 8);
        assert_eq!(counts[4], 6);
    }

    #[test]
    fn matching_identity_for_nearby_frames() {
        let fa = Frame::identity();
        let fb = Frame::from_axis_angle(&Vector3::z(), 0.1);
        assert!(octahedral_matching(&fa, &fb).is_identity());
    }

    #[test]
    fn matching_finds_quarter_turn() {
        // fb = fa rotated 85° about fa's first axis: nearest relabeling is the
        // 90° turn about that axis
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let fa = Frame::random(&mut rng);
            let rot = nalgebra::Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(fa.axis(0)),
                85f64.to_radians(),
            );
            let fb = fa.rotated_by(rot.matrix());
            let g = octahedral_matching(&fa, &fb);
            let quarter = nalgebra::Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(Vector3::x()),
                std::f64::consts::FRAC_PI_2,
            );
            assert!((g.matrix() - quarter.matrix()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn matching_is_inverse_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let fa = Frame::random(&mut rng);
            let fb = Frame::random(&mut rng);
            let g = octahedral_matching(&fa, &fb);
            let h = octahedral_matching(&fb, &fa);
            // generic frames have a unique best match, so they invert cleanly
            assert_eq!(g.inverse(), h);
        }
    }

    #[test]
    fn trivial_loop_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = Frame::random(&mut rng);
        // small wobbles around one frame: no singularity enclosed
        let frames: Vec<Frame> = (0..8)
            .map(|i| {
                let ang = 0.05 * (i as f64).sin();
                base.rotated_by(
                    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(1.0, 2.0, 3.0)), ang)
                        .matrix(),
                )
            })
            .collect();
        assert!(loop_rotation(&frames).is_identity());
    }

    #[test]
    fn quarter_turn_loop_detected() {
        // frames spinning by 90° total around z while walking the loop
        let n = 12;
        let frames: Vec<Frame> = (0..n)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Frame::from_axis_angle(&Vector3::z(), phi / 4.0)
            })
            .collect();
        let g = loop_rotation(&frames);
        assert!(!g.is_identity());
        assert_eq!(g.order(), 4);
        // the element is a turn about z: it fixes ±z
        let mz = g.matrix();
        assert!((mz[(2, 2)] - 1.0).abs() < 1e-12);
    }
}
