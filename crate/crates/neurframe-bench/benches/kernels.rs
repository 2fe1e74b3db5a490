use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::Point3;
use neurframe_bench::{random_directions, random_frames};
use neurframe_core::mesh::{generate_primitive, preprocess, Primitive, FEATURE_ANGLE};
use neurframe_core::{
    align_row, frame_to_sh, loss_and_grad, project_to_frame, shrot, Mlp, TrainConfig,
    TrainingData,
};

fn bench_frame_to_sh(c: &mut Criterion) {
    let frames = random_frames(256, 7);
    c.bench_function("frame_to_sh_256", |b| {
        b.iter(|| {
            for f in &frames {
                black_box(frame_to_sh(f));
            }
        })
    });
}

fn bench_align_row(c: &mut Criterion) {
    let dirs = random_directions(256, 8);
    c.bench_function("align_row_256", |b| {
        b.iter(|| {
            for d in &dirs {
                black_box(align_row(d));
            }
        })
    });
}

fn bench_project(c: &mut Criterion) {
    let qs: Vec<_> = random_frames(64, 9).iter().map(frame_to_sh).collect();
    c.bench_function("project_to_frame_64", |b| {
        b.iter(|| {
            for q in &qs {
                black_box(project_to_frame(q).unwrap());
            }
        })
    });
}

fn bench_shrot(c: &mut Criterion) {
    let frames = random_frames(64, 10);
    c.bench_function("shrot_64", |b| {
        b.iter(|| {
            for f in &frames {
                black_box(shrot(f.matrix()).unwrap());
            }
        })
    });
}

fn bench_forward(c: &mut Criterion) {
    let mlp = Mlp::standard(0);
    let points: Vec<Point3<f64>> = random_directions(64, 11)
        .into_iter()
        .map(|d| Point3::from(d * 0.8))
        .collect();
    c.bench_function("forward_64_points", |b| {
        b.iter(|| black_box(mlp.forward(&points).unwrap()))
    });
}

fn bench_loss_and_grad(c: &mut Criterion) {
    let mesh = generate_primitive(Primitive::Cube, 2).unwrap();
    let pre = preprocess(mesh, None, FEATURE_ANGLE).unwrap();
    let config = TrainConfig::default();
    let data = TrainingData::new(&pre, config.sigma);
    let mlp = Mlp::standard(0);
    let weights = config.weights();
    // one full training iteration minus the optimizer update
    c.bench_function("loss_and_grad_cube2", |b| {
        b.iter(|| black_box(loss_and_grad(&mlp, &data, &weights).unwrap()))
    });
}

criterion_group!(
    kernels,
    bench_frame_to_sh,
    bench_align_row,
    bench_project,
    bench_shrot,
    bench_forward,
    bench_loss_and_grad
);
criterion_main!(kernels);
