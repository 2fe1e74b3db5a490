//! Embedded oracle suite: recomputes frozen constants and analytic gradients
//! by independent routes so an installed binary can vouch for its own build.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frame::Frame;
use crate::field::Mlp;
use crate::mesh::{generate_primitive, preprocess, Primitive, FEATURE_ANGLE};
use crate::octa::OctaRotation;
use crate::quadrature::SphereQuadrature;
use crate::sh::{band4_scale, canonical_sh, evaluate_frame_function, frame_to_sh, sh_basis};
use crate::train::{evaluate_losses, loss_and_grad, TrainingData};

/// Outcome of one embedded check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every embedded check and returns one report per check.
pub fn run_selfcheck() -> Vec<CheckReport> {
    vec![
        canonical_coefficients_check(),
        quadrature_projection_check(0.0),
        octahedral_closure_check(),
        loss_gradient_check(),
    ]
}

/// The axis-aligned coefficient vector must reproduce its closed form
/// exactly: (√(5/12), 0, 0, 0, √(7/12), 0, 0, 0, 0).
pub fn canonical_coefficients_check() -> CheckReport {
    let q = frame_to_sh(&Frame::identity());
    let expect = [
        (5.0f64 / 12.0).sqrt(),
        0.0,
        0.0,
        0.0,
        (7.0f64 / 12.0).sqrt(),
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    let mut max_diff = 0.0f64;
    for i in 0..9 {
        max_diff = max_diff.max((q[i] - expect[i]).abs());
    }
    let q0 = canonical_sh();
    let table_matches = (0..9).all(|i| q0[i] == expect[i]);
    CheckReport {
        name: "canonical coefficients",
        passed: max_diff == 0.0 && table_matches,
        detail: format!("max deviation from closed form {max_diff:.3e}"),
    }
}

/// Compares the frozen coefficient table against a dense sphere-quadrature
/// projection of the frame symmetry function on random frames.
///
/// `perturb` is added to the first tabulated coefficient before comparing;
/// nonzero values simulate a corrupted constant table and must make the
/// check fail.
pub fn quadrature_projection_check(perturb: f64) -> CheckReport {
    let quad = SphereQuadrature::product_grid(8, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut max_rel = 0.0f64;
    for _ in 0..10 {
        let f = Frame::random(&mut rng);
        let mut q = frame_to_sh(&f);
        q[0] += perturb;
        let mut err2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..9 {
            let ci = quad
                .integrate(|s| evaluate_frame_function(&f, s).unwrap() * sh_basis(s)[i])
                / band4_scale();
            err2 += (q[i] - ci) * (q[i] - ci);
            norm2 += ci * ci;
        }
        max_rel = max_rel.max((err2 / norm2).sqrt());
    }
    CheckReport {
        name: "quadrature projection",
        passed: max_rel < 1e-6,
        detail: format!("max relative error {max_rel:.3e} over 10 random frames"),
    }
}

/// The 24 symmetry rotations must form a closed group: every pairwise
/// product lands back in the table, matrix composition agrees with index
/// composition, inverses cancel, and the element orders census is
/// 1 + 9 + 8 + 6 over orders 1, 2, 3, 4.
pub fn octahedral_closure_check() -> CheckReport {
    let mut failures = Vec::new();
    for g in OctaRotation::all() {
        let det = g.matrix().determinant();
        if (det - 1.0).abs() > 1e-12 {
            failures.push(format!("element {} has determinant {det}", g.index()));
        }
        if !g.compose(g.inverse()).is_identity() {
            failures.push(format!("element {} inverse fails", g.index()));
        }
        for h in OctaRotation::all() {
            let composed = g.compose(h);
            let product = g.matrix() * h.matrix();
            if (composed.matrix() - product).abs().max() != 0.0 {
                failures.push(format!(
                    "compose({}, {}) disagrees with matrix product",
                    g.index(),
                    h.index()
                ));
            }
            if !OctaRotation::all().any(|k| (k.matrix() - product).abs().max() == 0.0) {
                failures.push(format!(
                    "product of {} and {} left the group",
                    g.index(),
                    h.index()
                ));
            }
        }
    }
    let mut order_census = [0usize; 5];
    for g in OctaRotation::all() {
        order_census[g.order() as usize] += 1;
    }
    if order_census != [0, 1, 9, 8, 6] {
        failures.push(format!("order census {order_census:?}"));
    }
    CheckReport {
        name: "octahedral closure",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "576 products verified".into()
        } else {
            failures.join("; ")
        },
    }
}

/// Compares the analytic loss gradient against central finite differences
/// on a one-cube fixture through a reduced network.
pub fn loss_gradient_check() -> CheckReport {
    let pre = match generate_primitive(Primitive::Cube, 1)
        .map_err(|e| e.to_string())
        .and_then(|m| preprocess(m, None, FEATURE_ANGLE).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            return CheckReport {
                name: "loss gradients",
                passed: false,
                detail: format!("fixture construction failed: {e}"),
            }
        }
    };
    let data = TrainingData::new(&pre, 10.0);
    let weights = crate::train::TrainConfig::default().weights();
    let mut mlp = Mlp::new(&[3, 8, 9], 30.0, 1);
    let (_, grads) = match loss_and_grad(&mlp, &data, &weights) {
        Ok(v) => v,
        Err(e) => {
            return CheckReport {
                name: "loss gradients",
                passed: false,
                detail: format!("gradient evaluation failed: {e}"),
            }
        }
    };
    let analytic = grads.flat();
    let base = mlp.params_flat();
    let h = 1e-6;
    let mut max_rel = 0.0f64;
    for k in (0..base.len()).step_by(7) {
        let mut probe = base.clone();
        probe[k] = base[k] + h;
        mlp.set_params_flat(&probe).unwrap();
        let up = evaluate_losses(&mlp, &data, &weights).unwrap().total(&weights);
        probe[k] = base[k] - h;
        mlp.set_params_flat(&probe).unwrap();
        let down = evaluate_losses(&mlp, &data, &weights).unwrap().total(&weights);
        let fd = (up - down) / (2.0 * h);
        let rel = (analytic[k] - fd).abs() / fd.abs().max(1e-3);
        max_rel = max_rel.max(rel);
    }
    CheckReport {
        name: "loss gradients",
        passed: max_rel < 1e-4,
        detail: format!("max relative error {max_rel:.3e} against finite differences"),
    }
}
