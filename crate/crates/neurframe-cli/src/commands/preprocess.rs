use anyhow::{bail, Context, Result};

use neurframe_core::mesh::{
    generate_primitive, load_feature_file, load_tet_mesh, preprocess, Primitive,
};

use crate::bundle::{self, hex, sha256_bytes};
use crate::manifest::{RunManifest, Stage};
use crate::{CliError, PreprocessArgs, PrimitiveArg};

impl From<PrimitiveArg> for Primitive {
    fn from(p: PrimitiveArg) -> Primitive {
        match p {
            PrimitiveArg::Cube => Primitive::Cube,
            PrimitiveArg::Box => Primitive::Box,
            PrimitiveArg::Cylinder => Primitive::Cylinder,
            PrimitiveArg::Lshape => Primitive::LShape,
        }
    }
}

pub fn run(args: PreprocessArgs) -> Result<(), CliError> {
    Ok(inner(args)?)
}

fn inner(args: PreprocessArgs) -> Result<()> {
    let mut manifest = RunManifest::new("preprocess");

    let load = Stage::start();
    let (mesh, source) = match (&args.mesh, args.primitive) {
        (Some(path), None) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading mesh {}", path.display()))?;
            manifest.inputs.insert("mesh".into(), hex(&sha256_bytes(&bytes)));
            let mesh = load_tet_mesh(path)?;
            (mesh, path.display().to_string())
        }
        (None, Some(p)) => {
            let source = format!("primitive:{:?}:{}", p, args.resolution).to_lowercase();
            manifest.inputs.insert("mesh".into(), source.clone());
            (generate_primitive(p.into(), args.resolution)?, source)
        }
        (None, None) => bail!("give a mesh file or --primitive"),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };

    let user_features = match &args.features {
        Some(path) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading features {}", path.display()))?;
            manifest.inputs.insert("features".into(), hex(&sha256_bytes(&bytes)));
            Some(load_feature_file(path)?)
        }
        None => None,
    };
    load.record(&mut manifest, "load");

    if !(0.0..=180.0).contains(&args.feature_angle) {
        bail!("--feature-angle must be between 0 and 180 degrees");
    }
    let angle = args.feature_angle.to_radians();

    let work = Stage::start();
    let pre = preprocess(mesh, user_features, angle)?;
    work.record(&mut manifest, "preprocess");

    let write = Stage::start();
    let hash = bundle::write_bundle(&pre, &source, &args.out)?;
    write.record(&mut manifest, "write");

    manifest.config = serde_json::json!({
        "feature_angle_degrees": args.feature_angle,
        "features_override": args.features.is_some(),
        "resolution": args.primitive.map(|_| args.resolution),
    });
    manifest.outputs = vec![
        bundle::INPUT_MESH_FILE.into(),
        bundle::NORMALIZED_MESH_FILE.into(),
        bundle::FEATURES_FILE.into(),
        bundle::META_FILE.into(),
    ];
    manifest.stats = serde_json::json!({
        "training_points": pre.mesh.tets().len(),
        "dual_edges": pre.dual.edges.len(),
        "boundary_samples": pre.boundary.points.len(),
        "feature_segments": pre.features.segments().len(),
    });
    manifest.write(&args.out)?;

    println!(
        "bundle {} <- {}: {} training points, {} dual edges, {} boundary samples, {} feature segments",
        hex(&hash),
        source,
        pre.mesh.tets().len(),
        pre.dual.edges.len(),
        pre.boundary.points.len(),
        pre.features.segments().len(),
    );
    println!("wrote {}", args.out.display());
    Ok(())
}
