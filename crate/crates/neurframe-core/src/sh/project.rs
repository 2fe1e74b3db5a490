//! Pulling a raw 9-vector back to the nearest octahedral frame.
//!
//! The valid coefficient vectors form the 3-dimensional orbit of the
//! canonical vector under rotation. Projection seeds from a fixed candidate
//! set and then runs Gauss-Newton in the rotation's tangent space.

use std::sync::LazyLock;

use nalgebra::{Matrix3, Rotation3, Vector3};

use super::rotation::{generator, wigner};
use super::{canonical_sh, ShError, ShVec};
use crate::frame::Frame;
use crate::octa::OctaRotation;

/// Convergence threshold on the incremental rotation vector.
pub const PROJECT_TOL: f64 = 1e-9;
/// Iteration cap; hitting it marks the query as degenerate.
pub const PROJECT_MAX_ITERS: usize = 50;

/// Outcome of a projection run.
#[derive(Debug, Clone)]
pub struct Projection {
    pub frame: Frame,
    pub iterations: usize,
    pub converged: bool,
    /// ‖frame coefficients − normalized input‖ at the final iterate.
    pub residual: f64,
}

struct Candidate {
    rotation: Matrix3<f64>,
    coeffs: ShVec,
}

// Axis-aligned frames spun by eight in-plane angles: 24·8 seeds covering the
// orbit densely enough that Gauss-Newton starts inside a good basin.
static CANDIDATES: LazyLock<Vec<Candidate>> = LazyLock::new(|| {
    let q0 = canonical_sh();
    let mut out = Vec::with_capacity(192);
    for g in OctaRotation::all() {
        for j in 0..8 {
            let theta = j as f64 * std::f64::consts::FRAC_PI_2 / 8.0;
            let rotation =
                g.matrix() * Rotation3::from_axis_angle(&Vector3::z_axis(), theta).into_inner();
            let coeffs = wigner(&rotation).apply(&q0);
            out.push(Candidate { rotation, coeffs });
        }
    }
    out
});

fn reorthonormalize(m: &mut Matrix3<f64>) {
    let mut c0 = m.column(0).into_owned();
    c0 /= c0.norm();
    let mut c1 = m.column(1).into_owned();
    c1 -= c0 * c0.dot(&c1);
    c1 /= c1.norm();
    let c2 = c0.cross(&c1);
    m.set_column(0, &c0);
    m.set_column(1, &c1);
    m.set_column(2, &c2);
}

/// Full projection record; `Err` only for a zero input vector.
pub fn project_to_frame_detailed(q: &ShVec) -> Result<Projection, ShError> {
    let norm = q.norm();
    if norm < 1e-12 {
        return Err(ShError::ZeroCoefficients);
    }
    let target = q / norm;

    let mut r = CANDIDATES
        .iter()
        .min_by(|a, b| {
            let da = (a.coeffs - target).norm_squared();
            let db = (b.coeffs - target).norm_squared();
            da.partial_cmp(&db).unwrap()
        })
        .map(|c| c.rotation)
        .unwrap();

    let q0 = canonical_sh();
    for it in 1..=PROJECT_MAX_ITERS {
        let rot_sh = wigner(&r);
        let residual = rot_sh.apply(&q0) - target;
        // tangent directions of the orbit at the current rotation
        let cols = [
            rot_sh.matrix() * (generator(0) * q0),
            rot_sh.matrix() * (generator(1) * q0),
            rot_sh.matrix() * (generator(2) * q0),
        ];
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for a in 0..3 {
            jtr[a] = cols[a].dot(&residual);
            for b in a..3 {
                let v = cols[a].dot(&cols[b]);
                jtj[(a, b)] = v;
                jtj[(b, a)] = v;
            }
        }
        // the orbit has discrete stabilizers only, so the normal matrix stays
        // positive definite
        let Some(chol) = jtj.cholesky() else {
            return Ok(Projection {
                frame: Frame::from_matrix_unchecked(r),
                iterations: it,
                converged: false,
                residual: residual.norm(),
            });
        };
        let rhs = -jtr;
        let w = chol.solve(&rhs);
        r *= Rotation3::from_scaled_axis(w).into_inner();
        reorthonormalize(&mut r);
        if w.norm() < PROJECT_TOL {
            let final_res = (wigner(&r).apply(&q0) - target).norm();
            return Ok(Projection {
                frame: Frame::from_matrix_unchecked(r),
                iterations: it,
                converged: true,
                residual: final_res,
            });
        }
    }
    let final_res = (wigner(&r).apply(&q0) - target).norm();
    Ok(Projection {
        frame: Frame::from_matrix_unchecked(r),
        iterations: PROJECT_MAX_ITERS,
        converged: false,
        residual: final_res,
    })
}

/// Frame whose coefficients locally minimize the distance to q (normalized
/// internally). Errors on zero input and on failure to converge, which
/// signals a degenerate or singular query.
pub fn project_to_frame(q: &ShVec) -> Result<Frame, ShError> {
    let proj = project_to_frame_detailed(q)?;
    if proj.converged {
        Ok(proj.frame)
    } else {
        Err(ShError::ProjectionStalled {
            iterations: proj.iterations,
            residual: proj.residual,
        })
    }
}

/// Best-effort projection: returns the last iterate even when the iteration
/// stalls, and the axis-aligned frame for zero input. For consumers that
/// prefer any representative over an error.
pub fn project_to_frame_lenient(q: &ShVec) -> Frame {
    match project_to_frame_detailed(q) {
        Ok(p) => p.frame,
        Err(_) => Frame::identity(),
    }
}
