use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neurframe_core::analysis::{
    discretize_volume_field, extract_singular_points, extract_surface_cross_field,
    trace_streamline, trace_streamline_on_surface, write_cross_field, write_frames,
    write_singular_ply, Domain, StopReason, StreamlineOptions,
};
use neurframe_core::field::load_checkpoint;
use neurframe_core::mesh::write_obj_polylines;
use neurframe_core::Mlp;

use crate::bundle::{self, hex, Bundle};
use crate::commands::{env_seed, pick_seed};
use crate::manifest::{RunManifest, Stage};
use crate::{AnalyzeCommand, AnalyzeShared, CliError};

pub const SINGULAR_FILE: &str = "singular.ply";
pub const STREAMLINES_FILE: &str = "streamlines.obj";
pub const CROSSFIELD_FILE: &str = "crossfield.txt";
pub const FRAMES_FILE: &str = "frames.txt";

struct Loaded {
    mlp: Mlp,
    bundle: Bundle,
    manifest: RunManifest,
}

/// Loads the checkpoint and bundle and refuses a mismatched pairing.
fn load(shared: &AnalyzeShared, command: &str) -> Result<Loaded> {
    let mut manifest = RunManifest::new(command);
    let stage = Stage::start();
    let (mlp, transform, recorded) = load_checkpoint(&shared.checkpoint)
        .with_context(|| format!("reading checkpoint {}", shared.checkpoint.display()))?;
    let bundle = bundle::load_bundle(&shared.bundle)?;
    if recorded != bundle.hash {
        bail!(
            "checkpoint {} was trained against bundle {}, not {} ({})",
            shared.checkpoint.display(),
            hex(&recorded),
            hex(&bundle.hash),
            shared.bundle.display(),
        );
    }
    if transform != bundle.pre.transform {
        bail!("checkpoint and bundle disagree on the normalization transform");
    }
    manifest.inputs.insert("bundle".into(), hex(&bundle.hash));
    let ckpt_bytes = std::fs::read(&shared.checkpoint)?;
    manifest
        .inputs
        .insert("checkpoint".into(), hex(&bundle::sha256_bytes(&ckpt_bytes)));
    stage.record(&mut manifest, "load");
    std::fs::create_dir_all(&shared.out)
        .with_context(|| format!("creating output directory {}", shared.out.display()))?;
    Ok(Loaded { mlp, bundle, manifest })
}

fn finish(mut loaded: Loaded, out: &Path, stage: Stage) -> Result<()> {
    stage.record(&mut loaded.manifest, "analyze");
    loaded.manifest.write(out)
}

pub fn run(what: AnalyzeCommand) -> Result<(), CliError> {
    match what {
        AnalyzeCommand::Singularities { shared, seeds, max_depth, seed } => {
            singularities(shared, seeds, max_depth, seed)
        }
        AnalyzeCommand::Streamlines { shared, count, surface, step, max_steps, seed } => {
            streamlines(shared, count, surface, step, max_steps, seed)
        }
        AnalyzeCommand::Crossfield { shared } => crossfield(shared),
        AnalyzeCommand::Discretize { shared } => discretize(shared),
    }
    .map_err(CliError::Input)
}

fn singularities(
    shared: AnalyzeShared,
    seeds: usize,
    max_depth: u32,
    seed: Option<u64>,
) -> Result<()> {
    let mut loaded = load(&shared, "analyze-singularities")?;
    let rng_seed = pick_seed(seed, env_seed()?);
    let stage = Stage::start();
    let domain = Domain::from_mesh(&loaded.bundle.pre.mesh);
    let points = extract_singular_points(&loaded.mlp, &domain, seeds, max_depth, rng_seed)?;
    write_singular_ply(&points, &shared.out.join(SINGULAR_FILE))?;

    loaded.manifest.seed = Some(rng_seed);
    loaded.manifest.config =
        serde_json::json!({ "seeds": seeds, "max_depth": max_depth });
    loaded.manifest.outputs = vec![SINGULAR_FILE.into()];
    loaded.manifest.stats = serde_json::json!({ "singular_points": points.len() });
    println!("{} singular points", points.len());
    println!("wrote {}", shared.out.join(SINGULAR_FILE).display());
    finish(loaded, &shared.out, stage)
}

fn streamlines(
    shared: AnalyzeShared,
    count: usize,
    surface: bool,
    step: f64,
    max_steps: usize,
    seed: Option<u64>,
) -> Result<()> {
    if count == 0 {
        bail!("--count must be positive");
    }
    if !(step > 0.0) {
        bail!("--step must be positive");
    }
    let mut loaded = load(&shared, "analyze-streamlines")?;
    let rng_seed = pick_seed(seed, env_seed()?);
    let stage = Stage::start();
    let mesh = &loaded.bundle.pre.mesh;
    let domain = Domain::from_mesh(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let options = StreamlineOptions { step, max_steps, initial_direction: None };

    let mut lines = Vec::with_capacity(count);
    let mut failures = 0usize;
    for _ in 0..count {
        let line = if surface {
            let face = rng.gen_range(0..mesh.boundary_faces().len());
            let verts = mesh.boundary_faces()[face].verts;
            let v = mesh.vertices();
            let centroid = Point3::from(
                (v[verts[0]].coords + v[verts[1]].coords + v[verts[2]].coords) / 3.0,
            );
            trace_streamline_on_surface(&loaded.mlp, mesh, centroid, &options)
        } else {
            let seed_point = sample_interior_point(&domain, &mut rng)?;
            trace_streamline(&loaded.mlp, &domain, seed_point, &options)
        };
        if line.reason == StopReason::ProjectionFailure {
            failures += 1;
        }
        lines.push(line.points);
    }
    write_obj_polylines(&lines, &shared.out.join(STREAMLINES_FILE))?;

    let total_points: usize = lines.iter().map(|l| l.len()).sum();
    loaded.manifest.seed = Some(rng_seed);
    loaded.manifest.config = serde_json::json!({
        "count": count, "surface": surface, "step": step, "max_steps": max_steps,
    });
    loaded.manifest.outputs = vec![STREAMLINES_FILE.into()];
    loaded.manifest.stats = serde_json::json!({
        "streamlines": lines.len(),
        "points": total_points,
        "projection_failures": failures,
    });
    println!("{} streamlines, {} points, {} stopped on projection failure", lines.len(), total_points, failures);
    println!("wrote {}", shared.out.join(STREAMLINES_FILE).display());
    finish(loaded, &shared.out, stage)
}

fn sample_interior_point(domain: &Domain, rng: &mut ChaCha8Rng) -> Result<Point3<f64>> {
    let (lo, hi) = domain.bbox();
    for _ in 0..10_000 {
        let p = Point3::new(
            rng.gen_range(lo.x..=hi.x),
            rng.gen_range(lo.y..=hi.y),
            rng.gen_range(lo.z..=hi.z),
        );
        if domain.contains(&p) {
            return Ok(p);
        }
    }
    bail!("could not place a streamline seed inside the volume");
}

fn crossfield(shared: AnalyzeShared) -> Result<()> {
    let mut loaded = load(&shared, "analyze-crossfield")?;
    let stage = Stage::start();
    let field = extract_surface_cross_field(&loaded.mlp, &loaded.bundle.pre.mesh);
    write_cross_field(&field.crosses, &shared.out.join(CROSSFIELD_FILE))?;

    loaded.manifest.config = serde_json::Value::Null;
    loaded.manifest.outputs = vec![CROSSFIELD_FILE.into()];
    loaded.manifest.stats = serde_json::json!({
        "crosses": field.crosses.len(),
        "ambiguous": field.ambiguous,
        "projection_failures": field.failures,
    });
    println!(
        "{} crosses ({} ambiguous, {} projection failures)",
        field.crosses.len(),
        field.ambiguous.len(),
        field.failures.len(),
    );
    println!("wrote {}", shared.out.join(CROSSFIELD_FILE).display());
    finish(loaded, &shared.out, stage)
}

fn discretize(shared: AnalyzeShared) -> Result<()> {
    let mut loaded = load(&shared, "analyze-discretize")?;
    let stage = Stage::start();
    let field = discretize_volume_field(
        &loaded.mlp,
        &loaded.bundle.input_mesh,
        &loaded.bundle.pre.transform,
    );
    write_frames(&field.frames, &shared.out.join(FRAMES_FILE))?;

    loaded.manifest.config = serde_json::Value::Null;
    loaded.manifest.outputs = vec![FRAMES_FILE.into()];
    loaded.manifest.stats = serde_json::json!({
        "frames": field.frames.len(),
        "projection_failures": field.failures,
    });
    println!(
        "{} frames ({} projection failures)",
        field.frames.len(),
        field.failures.len(),
    );
    println!("wrote {}", shared.out.join(FRAMES_FILE).display());
    finish(loaded, &shared.out, stage)
}
