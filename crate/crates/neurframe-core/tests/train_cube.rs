//! End-to-end training runs on small cube meshes. These are slow tests (a
//! couple of minutes total); they exercise the full preprocess -> data ->
//! train pipeline through the public API only.

use neurframe_core::{
    align_residual, generate_primitive, preprocess, train, FrameField, Mlp, Primitive,
    TrainConfig, TrainingData,
};

const FEATURE_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

fn cube_data(resolution: u32) -> (neurframe_core::PreprocessedMesh, TrainingData) {
    let mesh = generate_primitive(Primitive::Cube, resolution).unwrap();
    let pre = preprocess(mesh, None, FEATURE_ANGLE).unwrap();
    let data = TrainingData::new(&pre, 10.0);
    (pre, data)
}

/// Mean |residual| between each boundary sample normal and the field at the
/// owning tet's centroid.
fn mean_boundary_residual(mlp: &Mlp, pre: &neurframe_core::PreprocessedMesh) -> f64 {
    let b = &pre.boundary;
    let mut sum = 0.0;
    for (tet, normal) in b.tets.iter().zip(&b.normals) {
        let q = mlp.coefficients(&pre.mesh.tet_centroid(*tet));
        sum += align_residual(&q, normal).abs();
    }
    sum / b.tets.len() as f64
}

#[test]
fn cube_run_aligns_the_boundary_and_smooths_the_interior() {
    let (pre, data) = cube_data(3);
    let mut mlp = Mlp::standard(0);
    let config = TrainConfig { iterations: 2000, ..TrainConfig::default() };

    let mut smooth_history = Vec::with_capacity(config.iterations);
    train(&mut mlp, &data, &config, |_, terms, _, _| {
        smooth_history.push(terms.smooth);
        Ok(())
    })
    .unwrap();

    let residual = mean_boundary_residual(&mlp, &pre);
    assert!(residual < 1e-3, "mean boundary residual {residual:.3e}");

    let at_100 = smooth_history[100];
    let last = *smooth_history.last().unwrap();
    assert!(
        last < 0.05 * at_100,
        "smoothness barely moved: {at_100:.3e} at iteration 100, {last:.3e} at the end"
    );
}

#[test]
fn boundary_only_run_descends_monotonically_after_smoothing() {
    let (_, data) = cube_data(3);
    let mut mlp = Mlp::standard(1);
    let config = TrainConfig {
        iterations: 800,
        lambda_smooth: 0.0,
        lambda_feature: 0.0,
        ..TrainConfig::default()
    };

    let mut boundary_history = Vec::with_capacity(config.iterations);
    train(&mut mlp, &data, &config, |_, terms, _, _| {
        boundary_history.push(terms.boundary);
        Ok(())
    })
    .unwrap();

    let window = 100;
    let ma: Vec<f64> = boundary_history
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    // the run converges to machine zero; below this floor the average only
    // jitters in the last bits, so monotonicity is asserted above it
    let floor = 1e-16 * ma[0];
    for (i, pair) in ma.windows(2).enumerate() {
        if pair[0] > floor {
            assert!(
                pair[1] < pair[0],
                "smoothed L_B rose at window {i}: {} -> {}",
                pair[0],
                pair[1]
            );
        } else {
            assert!(pair[1] < 10.0 * floor, "L_B bounced back at window {i}: {}", pair[1]);
        }
    }
    let last = *ma.last().unwrap();
    assert!(last < 1e-6 * ma[0], "descent stalled: {} -> {last}", ma[0]);
}

#[test]
fn zero_iterations_return_the_initial_parameters() {
    let (_, data) = cube_data(2);
    let mut mlp = Mlp::standard(7);
    let before = mlp.params_flat();
    let config = TrainConfig { iterations: 0, ..TrainConfig::default() };
    train(&mut mlp, &data, &config, |_, _, _, _| Ok(())).unwrap();
    let after = mlp.params_flat();
    assert_eq!(before.len(), after.len());
    for (x, y) in before.iter().zip(&after) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
