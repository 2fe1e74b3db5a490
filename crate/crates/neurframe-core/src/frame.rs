//! Right-handed orthonormal frames. A frame's columns are its three axes;
//! two frames describe the same cross of axes when they differ by one of the
//! 24 cube rotations acting on the columns.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use thiserror::Error;

use crate::octa::OctaRotation;

/// Orthonormality and handedness must hold to this tolerance.
pub const FRAME_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("matrix is not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("matrix is not right-handed (det {0:.6})")]
    NotRightHanded(f64),
}

/// A right-handed orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame(Matrix3<f64>);

impl Frame {
    pub fn identity() -> Self {
        Frame(Matrix3::identity())
    }

    /// Validates orthonormality and det = +1 to `FRAME_TOL`.
    pub fn new(m: Matrix3<f64>) -> Result<Self, FrameError> {
        let gram = m.transpose() * m - Matrix3::identity();
        let dev = gram.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if dev > FRAME_TOL {
            return Err(FrameError::NotOrthonormal(dev));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > FRAME_TOL {
            return Err(FrameError::NotRightHanded(det));
        }
        Ok(Frame(m))
    }

    /// Caller guarantees the invariant (columns orthonormal, det +1).
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Frame(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// The i-th axis (column), i in 0..3.
    pub fn axis(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into_owned()
    }

    pub fn axes(&self) -> [Vector3<f64>; 3] {
        [self.axis(0), self.axis(1), self.axis(2)]
    }

    /// The six signed axes ±v0, ±v1, ±v2.
    pub fn signed_axes(&self) -> [Vector3<f64>; 6] {
        [
            self.axis(0),
            -self.axis(0),
            self.axis(1),
            -self.axis(1),
            self.axis(2),
            -self.axis(2),
        ]
    }

    /// Permutes/sign-flips the axes: the same cross of axes, relabeled.
    pub fn relabel(&self, g: OctaRotation) -> Frame {
        Frame(self.0 * g.matrix())
    }

    /// The frame rotated as a rigid object: axes become r·v_i.
    pub fn rotated_by(&self, r: &Matrix3<f64>) -> Frame {
        Frame(r * self.0)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Frame {
        let r = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(*axis),
            angle,
        );
        Frame(r.into_inner())
    }

    /// Geodesic angle of the relative rotation selfᵀ·other (axes compared
    /// label-to-label, not up to relabeling).
    pub fn angle_to(&self, other: &Frame) -> f64 {
        let rel = self.0.transpose() * other.0;
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Uniformly distributed random frame (uniform unit quaternion).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Frame {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let u3: f64 = rng.gen();
        let two_pi = 2.0 * std::f64::consts::PI;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let q = Quaternion::new(
            a * (two_pi * u2).sin(),
            a * (two_pi * u2).cos(),
            b * (two_pi * u3).sin(),
            b * (two_pi * u3).cos(),
        );
        let r = UnitQuaternion::from_quaternion(q).to_rotation_matrix();
        Frame(r.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_axes() {
        let f = Frame::identity();
        assert_eq!(f.axis(0), Vector3::x());
        assert_eq!(f.axis(2), Vector3::z());
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut m = Matrix3::identity();
        m[(0, 0)] = 1.1;
        assert!(matches!(Frame::new(m), Err(FrameError::NotOrthonormal(_))));
    }

    #[test]
    fn rejects_reflection() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(matches!(Frame::new(m), Err(FrameError::NotRightHanded(_))));
    }

    #[test]
    fn random_frames_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = Frame::random(&mut rng);
            Frame::new(*f.matrix()).unwrap();
        }
    }

    #[test]
    fn angle_to_measures_relative_rotation() {
        let f = Frame::identity();
        let g = Frame::from_axis_angle(&Vector3::y(), 0.4);
        assert!((f.angle_to(&g) - 0.4).abs() < 1e-12);
    }
}
