//! Rotating degree-4 coefficient vectors.
//!
//! Rotations about z act block-diagonally on the (cos, sin) pairs of each
//! azimuthal order. An arbitrary rotation is decomposed into Z-Y-Z Euler
//! angles, with the y factor conjugated through a fixed quarter-turn about x
//! whose 9×9 matrix has closed-form surd entries.

use std::f64::consts::PI;
use std::sync::LazyLock;

use nalgebra::{Matrix3, Rotation3, SMatrix, SVector, Unit, Vector3};

use super::{ShError, ShVec};

/// Orthogonal 9×9 action of a 3D rotation on degree-4 coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ShRotation(SMatrix<f64, 9, 9>);

impl ShRotation {
    pub fn identity() -> Self {
        ShRotation(SMatrix::identity())
    }

    pub fn matrix(&self) -> &SMatrix<f64, 9, 9> {
        &self.0
    }

    pub fn apply(&self, q: &ShVec) -> ShVec {
        self.0 * q
    }

    pub fn compose(&self, other: &ShRotation) -> ShRotation {
        ShRotation(self.0 * other.0)
    }

    /// The inverse rotation; valid because the matrix is orthogonal.
    pub fn transpose(&self) -> ShRotation {
        ShRotation(self.0.transpose())
    }

    pub fn row(&self, i: usize) -> SVector<f64, 9> {
        self.0.row(i).transpose()
    }
}

/// Quarter-turn about x acting on coefficients. Entries are exact surds;
/// the matrix is orthogonal and fixes the canonical vector.
static X90: LazyLock<SMatrix<f64, 9, 9>> = LazyLock::new(|| {
    let r2 = 2f64.sqrt() / 4.0;
    let r5 = 5f64.sqrt() / 4.0;
    let r7 = 7f64.sqrt() / 4.0;
    let r14 = 14f64.sqrt() / 4.0;
    let r35 = 35f64.sqrt() / 8.0;
    #[rustfmt::skip]
    let m = SMatrix::<f64, 9, 9>::from_row_slice(&[
        0.125, 0.0,  -r7, 0.0,   r35, 0.0,  0.0,   0.0,  0.0,
        0.0,   0.0,  0.0, 0.0,   0.0, 0.0,  -r14,  0.0,  r2,
        -r7,   0.0,  0.5, 0.0,   r5,  0.0,  0.0,   0.0,  0.0,
        0.0,   0.0,  0.0, 0.0,   0.0, 0.0,  -r2,   0.0,  -r14,
        r35,   0.0,  r5,  0.0,   0.375, 0.0, 0.0,  0.0,  0.0,
        0.0,   0.0,  0.0, 0.0,   0.0, 0.75, 0.0,   r7,   0.0,
        0.0,   r14,  0.0, r2,    0.0, 0.0,  0.0,   0.0,  0.0,
        0.0,   0.0,  0.0, 0.0,   0.0, r7,   0.0,   -0.75, 0.0,
        0.0,   -r2,  0.0, r14,   0.0, 0.0,  0.0,   0.0,  0.0,
    ]);
    m
});

/// The fixed quarter-turn-about-x coefficient matrix.
pub fn x90() -> &'static SMatrix<f64, 9, 9> {
    &X90
}

/// Coefficient rotation for a turn of `theta` about z: each azimuthal order m
/// mixes its cosine and sine components by the angle m·theta.
pub fn z_rotation(theta: f64) -> ShRotation {
    let mut m = SMatrix::<f64, 9, 9>::zeros();
    m[(4, 4)] = 1.0;
    for order in 1..=4usize {
        let (s, c) = (order as f64 * theta).sin_cos();
        let hi = 4 - order;
        let lo = 4 + order;
        m[(hi, hi)] = c;
        m[(hi, lo)] = -s;
        m[(lo, hi)] = s;
        m[(lo, lo)] = c;
    }
    ShRotation(m)
}

/// Coefficient rotation for a turn of `beta` about y, built by conjugating
/// the z form through the quarter-turn about x.
pub fn y_rotation(beta: f64) -> ShRotation {
    ShRotation(X90.transpose() * z_rotation(beta).0 * *X90)
}

const GIMBAL_EPS: f64 = 1e-9;

/// Z-Y-Z Euler angles (α, β, γ) with R = R_z(α)·R_y(β)·R_z(γ), β ∈ [0, π].
/// At the gimbal configurations β ∈ {0, π} the split between α and γ is
/// arbitrary; γ is set to zero there.
pub fn zyz_angles(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let sb = (r[(0, 2)] * r[(0, 2)] + r[(1, 2)] * r[(1, 2)]).sqrt();
    if sb < GIMBAL_EPS {
        if r[(2, 2)] > 0.0 {
            (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
        } else {
            ((-r[(1, 0)]).atan2(-r[(0, 0)]), PI, 0.0)
        }
    } else {
        let alpha = r[(1, 2)].atan2(r[(0, 2)]);
        let beta = sb.atan2(r[(2, 2)]);
        let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
        (alpha, beta, gamma)
    }
}

// Unvalidated construction for matrices already known to be rotations.
// Turns about z take the closed-form path, which keeps them exact.
pub(crate) fn wigner(r: &Matrix3<f64>) -> ShRotation {
    let (alpha, beta, gamma) = zyz_angles(r);
    if beta == 0.0 {
        return z_rotation(alpha + gamma);
    }
    ShRotation(z_rotation(alpha).0 * y_rotation(beta).0 * z_rotation(gamma).0)
}

/// Coefficient rotation corresponding to a 3D rotation matrix.
pub fn shrot(r: &Matrix3<f64>) -> Result<ShRotation, ShError> {
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = (r.determinant() - 1.0).abs();
    let defect = ortho.max(det);
    if defect > 1e-8 {
        return Err(ShError::NotRotation(defect));
    }
    Ok(wigner(r))
}

/// A rotation carrying direction d onto the +z axis (d need not be unit).
/// The in-plane gauge is arbitrary; zonal-row consumers are gauge-invariant.
pub fn rotation_to_z(d: &Vector3<f64>) -> Matrix3<f64> {
    let d = d.normalize();
    let axis = Vector3::new(d.y, -d.x, 0.0); // d × z
    let s = axis.norm();
    if s < 1e-12 {
        if d.z > 0.0 {
            Matrix3::identity()
        } else {
            // half-turn about x swaps the poles
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
        }
    } else {
        let angle = s.atan2(d.z);
        Rotation3::from_axis_angle(&Unit::new_unchecked(axis / s), angle).into_inner()
    }
}

/// Zonal row of the coefficient rotation that carries d to the pole. Dotting
/// it with a coefficient vector reads off how aligned the encoded frame is
/// with d; the row is the same for d and −d.
pub fn align_row(d: &Vector3<f64>) -> SVector<f64, 9> {
    wigner(&rotation_to_z(d)).row(4)
}

static L_Z: LazyLock<SMatrix<f64, 9, 9>> = LazyLock::new(|| {
    let mut m = SMatrix::<f64, 9, 9>::zeros();
    for order in 1..=4usize {
        m[(4 - order, 4 + order)] = -(order as f64);
        m[(4 + order, 4 - order)] = order as f64;
    }
    m
});

static L_Y: LazyLock<SMatrix<f64, 9, 9>> = LazyLock::new(|| X90.transpose() * *L_Z * *X90);

static L_X: LazyLock<SMatrix<f64, 9, 9>> =
    LazyLock::new(|| y_rotation(PI / 2.0).0 * *L_Z * y_rotation(-PI / 2.0).0);

/// Derivative at the identity of the coefficient rotation about coordinate
/// axis `axis` (0 = x, 1 = y, 2 = z); the tangent maps of the orbit of any
/// coefficient vector.
pub fn generator(axis: usize) -> &'static SMatrix<f64, 9, 9> {
    match axis {
        0 => &L_X,
        1 => &L_Y,
        2 => &L_Z,
        _ => panic!("axis index {axis} out of range"),
    }
}
