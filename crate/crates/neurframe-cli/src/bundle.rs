//! Preprocessed bundle on disk: the subdivided mesh in input and normalized
//! coordinates, the feature segments, and a metadata file with per-file
//! digests. The digest of the digests names the bundle; checkpoints record
//! it so analyses can refuse a mismatched pairing.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use neurframe_core::mesh::{
    boundary_samples, build_dual_graph, load_feature_file, load_tet_mesh, write_feature_file,
    write_tet_mesh, NormalizeTransform, PreprocessedMesh, TetMesh,
};

pub const META_FILE: &str = "bundle.json";
pub const INPUT_MESH_FILE: &str = "input.mesh";
pub const NORMALIZED_MESH_FILE: &str = "mesh.mesh";
pub const FEATURES_FILE: &str = "features.feat";
const FORMAT_VERSION: u32 = 1;

// hashed in this fixed order
const HASHED_FILES: [&str; 3] = [INPUT_MESH_FILE, NORMALIZED_MESH_FILE, FEATURES_FILE];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub format_version: u32,
    /// Where the mesh came from: a file path or a primitive descriptor.
    pub source: String,
    pub scale: f64,
    pub center: [f64; 3],
    pub counts: BundleCounts,
    /// File name -> hex sha256 of the file's bytes.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleCounts {
    pub vertices: usize,
    pub tets: usize,
    pub dual_edges: usize,
    pub boundary_samples: usize,
    pub feature_segments: usize,
}

/// A bundle loaded back into memory, with derived structures rebuilt.
pub struct Bundle {
    pub meta: BundleMeta,
    pub pre: PreprocessedMesh,
    /// The same tets as `pre.mesh`, in input coordinates.
    pub input_mesh: TetMesh,
    pub hash: [u8; 32],
}

pub fn sha256_bytes(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

pub fn hex(digest: &[u8; 32]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn combined_hash(per_file: &BTreeMap<String, String>) -> Result<[u8; 32]> {
    let mut h = Sha256::new();
    for name in HASHED_FILES {
        let hexdigest = per_file
            .get(name)
            .with_context(|| format!("bundle metadata lists no digest for {name}"))?;
        let mut raw = [0u8; 32];
        if hexdigest.len() != 64 {
            bail!("digest for {name} is not 64 hex characters");
        }
        for (i, byte) in raw.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&hexdigest[2 * i..2 * i + 2], 16)
                .with_context(|| format!("digest for {name} is not hex"))?;
        }
        h.update(raw);
    }
    Ok(h.finalize().into())
}

/// Writes the bundle files and metadata into `dir`, returning the combined
/// bundle hash.
pub fn write_bundle(pre: &PreprocessedMesh, source: &str, dir: &Path) -> Result<[u8; 32]> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating bundle directory {}", dir.display()))?;

    // same connectivity, vertices mapped back to input coordinates
    let input_vertices =
        pre.mesh.vertices().iter().map(|v| pre.transform.to_input(v)).collect();
    let input_mesh = TetMesh::from_parts(input_vertices, pre.mesh.tets().to_vec())
        .context("de-normalizing the mesh")?;

    write_tet_mesh(&input_mesh, &dir.join(INPUT_MESH_FILE))?;
    write_tet_mesh(&pre.mesh, &dir.join(NORMALIZED_MESH_FILE))?;
    write_feature_file(&pre.features, &dir.join(FEATURES_FILE))?;

    let mut files = BTreeMap::new();
    for name in HASHED_FILES {
        let bytes = std::fs::read(dir.join(name))?;
        files.insert(name.to_string(), hex(&sha256_bytes(&bytes)));
    }
    let meta = BundleMeta {
        format_version: FORMAT_VERSION,
        source: source.to_string(),
        scale: pre.transform.scale,
        center: pre.transform.center,
        counts: BundleCounts {
            vertices: pre.mesh.vertices().len(),
            tets: pre.mesh.tets().len(),
            dual_edges: pre.dual.edges.len(),
            boundary_samples: pre.boundary.points.len(),
            feature_segments: pre.features.segments().len(),
        },
        files,
    };
    let json = serde_json::to_string_pretty(&meta)?;
    std::fs::write(dir.join(META_FILE), json + "\n")?;
    combined_hash(&meta.files)
}

/// Loads a bundle, verifying every file against its recorded digest and
/// rebuilding the derived structures from the normalized mesh.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let meta_path = dir.join(META_FILE);
    let meta: BundleMeta = serde_json::from_str(
        &std::fs::read_to_string(&meta_path)
            .with_context(|| format!("reading {}", meta_path.display()))?,
    )
    .with_context(|| format!("parsing {}", meta_path.display()))?;
    if meta.format_version != FORMAT_VERSION {
        bail!("bundle format version {} is not supported", meta.format_version);
    }

    for name in HASHED_FILES {
        let bytes = std::fs::read(dir.join(name))
            .with_context(|| format!("reading bundle file {name}"))?;
        let actual = hex(&sha256_bytes(&bytes));
        let expected = meta
            .files
            .get(name)
            .with_context(|| format!("bundle metadata lists no digest for {name}"))?;
        if actual != *expected {
            bail!("bundle file {name} does not match its recorded digest");
        }
    }

    let mesh = load_tet_mesh(&dir.join(NORMALIZED_MESH_FILE))?;
    let input_mesh = load_tet_mesh(&dir.join(INPUT_MESH_FILE))?;
    if input_mesh.tets() != mesh.tets() {
        bail!("input and normalized meshes disagree on connectivity");
    }
    let features = load_feature_file(&dir.join(FEATURES_FILE))?;
    let dual = build_dual_graph(&mesh);
    let boundary = boundary_samples(&mesh)?;
    let transform = NormalizeTransform { scale: meta.scale, center: meta.center };
    let hash = combined_hash(&meta.files)?;
    Ok(Bundle {
        meta,
        pre: PreprocessedMesh { mesh, transform, dual, boundary, features },
        input_mesh,
        hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use neurframe_core::mesh::{generate_primitive, preprocess, Primitive, FEATURE_ANGLE};

    fn fixture() -> PreprocessedMesh {
        let mesh = generate_primitive(Primitive::Cube, 2).unwrap();
        preprocess(mesh, None, FEATURE_ANGLE).unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let pre = fixture();
        let dir = tempfile::tempdir().unwrap();
        let hash = write_bundle(&pre, "primitive:cube:2", dir.path()).unwrap();

        let bundle = load_bundle(dir.path()).unwrap();
        assert_eq!(bundle.hash, hash);
        assert_eq!(bundle.meta.source, "primitive:cube:2");
        assert_eq!(bundle.pre.mesh.tets(), pre.mesh.tets());
        assert_eq!(bundle.pre.mesh.vertices(), pre.mesh.vertices());
        assert_eq!(bundle.pre.dual.edges.len(), pre.dual.edges.len());
        assert_eq!(bundle.pre.boundary.points, pre.boundary.points);
        assert_eq!(bundle.pre.features.segments().len(), pre.features.segments().len());
        assert_eq!(bundle.pre.transform, pre.transform);
        assert_eq!(bundle.input_mesh.tets(), pre.mesh.tets());
        // input mesh maps back onto the normalized one
        for (iv, nv) in bundle.input_mesh.vertices().iter().zip(pre.mesh.vertices()) {
            let back = pre.transform.to_normalized(iv);
            assert!((back - nv).norm() < 1e-12);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let pre = fixture();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&pre, "primitive:cube:2", dir.path()).unwrap();

        let victim = dir.path().join(FEATURES_FILE);
        let mut text = std::fs::read_to_string(&victim).unwrap();
        text.push_str("0 0 0 1 1 1\n");
        std::fs::write(&victim, text).unwrap();

        let err = match load_bundle(dir.path()) {
            Err(e) => e.to_string(),
            Ok(_) => panic!("tampered bundle loaded"),
        };
        assert!(err.contains("does not match"), "{err}");
    }

    #[test]
    fn the_bundle_hash_tracks_content() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let hash_cube = write_bundle(&fixture(), "a", dir_a.path()).unwrap();
        let boxy = generate_primitive(Primitive::Box, 2).unwrap();
        let pre_box = preprocess(boxy, None, FEATURE_ANGLE).unwrap();
        let hash_box = write_bundle(&pre_box, "b", dir_b.path()).unwrap();
        assert_ne!(hash_cube, hash_box);

        // identical content in a fresh directory hashes identically
        let dir_c = tempfile::tempdir().unwrap();
        let hash_again = write_bundle(&fixture(), "a", dir_c.path()).unwrap();
        assert_eq!(hash_cube, hash_again);
    }
}
