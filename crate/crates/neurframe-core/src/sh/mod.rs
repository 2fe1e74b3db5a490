//! Band-4 spherical-harmonic encoding of octahedral frames.
//!
//! A frame's symmetry function is a degree-4 polynomial on the sphere, so it
//! lives entirely in the constant band plus the nine-dimensional degree-4
//! band. All frame comparisons, alignment penalties and rotations act on the
//! unit 9-vector of degree-4 coefficients.

pub mod project;
pub mod rotation;

use std::f64::consts::PI;

use nalgebra::{SVector, Vector3};
use thiserror::Error;

use crate::frame::Frame;

/// Degree-4 coefficient vector. Component `i` holds the azimuthal-order
/// `4 - i` harmonic for `i < 4` (cosine type), the zonal harmonic at `i = 4`,
/// and the order `i - 4` sine-type harmonic for `i > 4`.
pub type ShVec = SVector<f64, 9>;

#[derive(Debug, Error)]
pub enum ShError {
    #[error("direction must be unit length, got norm {0}")]
    NonUnitDirection(f64),
    #[error("matrix is not a rotation (defect {0:.3e})")]
    NotRotation(f64),
    #[error("coefficient vector is zero; nothing to project")]
    ZeroCoefficients,
    #[error("frame projection stalled after {iterations} iterations (residual {residual:.3e})")]
    ProjectionStalled { iterations: usize, residual: f64 },
}

/// Value of the constant basis function Y₀₀.
pub fn y00() -> f64 {
    0.5 / PI.sqrt()
}

/// Coefficient of Y₀₀ shared by every frame function; frames differ only in
/// the degree-4 band.
pub fn band0_coefficient() -> f64 {
    2.0 * PI.sqrt() / 5.0
}

/// Common scale multiplying the unit degree-4 coefficient vector in the
/// frame function expansion. Negative: the function has minima, not maxima,
/// along the frame axes.
pub fn band4_scale() -> f64 {
    -4.0 * (21.0 * PI).sqrt() / 105.0
}

/// Zonal coefficient attained exactly when one frame axis points along the
/// pole; the target value inside alignment residuals.
pub fn aligned_zonal_value() -> f64 {
    (7.0f64 / 12.0).sqrt()
}

/// Coefficients of the axis-aligned frame: (√(5/12), 0, 0, 0, √(7/12), 0, 0, 0, 0).
pub fn canonical_sh() -> ShVec {
    let mut q = ShVec::zeros();
    q[0] = (5.0f64 / 12.0).sqrt();
    q[4] = (7.0f64 / 12.0).sqrt();
    q
}

/// Evaluates the nine degree-4 basis functions at a point of the unit sphere.
pub fn sh_basis(s: &Vector3<f64>) -> ShVec {
    let (x, y, z) = (s.x, s.y, s.z);
    let x2 = x * x;
    let y2 = y * y;
    let z2 = z * z;

    let k4 = 0.1875 * (35.0 / PI).sqrt();
    let k3 = 0.75 * (35.0 / (2.0 * PI)).sqrt();
    let k2c = 0.375 * (5.0 / PI).sqrt();
    let k1 = 0.75 * (5.0 / (2.0 * PI)).sqrt();
    let k0 = 0.1875 / PI.sqrt();
    let k2s = 0.75 * (5.0 / PI).sqrt();

    ShVec::from([
        k4 * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2),
        k3 * x * z * (x2 - 3.0 * y2),
        k2c * (x2 - y2) * (7.0 * z2 - 1.0),
        k1 * x * z * (7.0 * z2 - 3.0),
        k0 * (35.0 * z2 * z2 - 30.0 * z2 + 3.0),
        k1 * y * z * (7.0 * z2 - 3.0),
        k2s * x * y * (7.0 * z2 - 1.0),
        k3 * y * z * (3.0 * x2 - y2),
        k4 * 4.0 * x * y * (x2 - y2),
    ])
}

/// The frame's symmetry function Σ_{i<j} (vᵢᵀs)²(vⱼᵀs)² at unit direction s.
/// Vanishes exactly on the six axis directions and peaks at 1/3 on the
/// body diagonals.
pub fn evaluate_frame_function(f: &Frame, s: &Vector3<f64>) -> Result<f64, ShError> {
    let n = s.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(ShError::NonUnitDirection(n));
    }
    let d0 = f.axis(0).dot(s);
    let d1 = f.axis(1).dot(s);
    let d2 = f.axis(2).dot(s);
    let (a, b, c) = (d0 * d0, d1 * d1, d2 * d2);
    Ok(a * b + b * c + c * a)
}

/// Degree-4 coefficients of the frame's symmetry function, a unit 9-vector.
/// Invariant under the 24 relabelings of the frame axes.
pub fn frame_to_sh(f: &Frame) -> ShVec {
    rotation::wigner(f.matrix()).apply(&canonical_sh())
}

/// How far q is from having a frame axis along d: √(7/12) minus the zonal
/// coefficient after rotating d to the pole. Zero exactly at alignment.
pub fn align_residual(q: &ShVec, d: &Vector3<f64>) -> f64 {
    aligned_zonal_value() - rotation::align_row(d).dot(q)
}

/// Squared coefficient distance ‖qa − qb‖²; zero iff the frames agree up to
/// axis relabeling.
pub fn frame_distance(qa: &ShVec, qb: &ShVec) -> f64 {
    (qa - qb).norm_squared()
}
