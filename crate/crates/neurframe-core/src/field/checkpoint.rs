//! Binary checkpoint format (.nfck): magic, version, omega, layer sizes,
//! parameters as little-endian f64, the mesh normalization transform, and
//! a 32-byte digest naming the preprocessed bundle the network was trained
//! against. Loading restores the network bit for bit.

use std::path::Path;

use super::mlp::Mlp;
use super::FieldError;
use crate::mesh::NormalizeTransform;

const MAGIC: &[u8; 4] = b"NFCK";
const VERSION: u32 = 1;

pub fn save_checkpoint(
    path: &Path,
    mlp: &Mlp,
    transform: &NormalizeTransform,
    bundle_hash: &[u8; 32],
) -> Result<(), FieldError> {
    std::fs::write(path, encode_checkpoint(mlp, transform, bundle_hash))?;
    Ok(())
}

pub fn load_checkpoint(
    path: &Path,
) -> Result<(Mlp, NormalizeTransform, [u8; 32]), FieldError> {
    decode_checkpoint(&std::fs::read(path)?)
}

pub fn encode_checkpoint(
    mlp: &Mlp,
    transform: &NormalizeTransform,
    bundle_hash: &[u8; 32],
) -> Vec<u8> {
    let params = mlp.params_flat();
    let mut out = Vec::with_capacity(4 + 4 + 8 + 4 + 4 * mlp.dims().len() + 8 * params.len() + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&mlp.omega().to_le_bytes());
    out.extend_from_slice(&(mlp.dims().len() as u32).to_le_bytes());
    for &d in mlp.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &params {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&transform.scale.to_le_bytes());
    for c in transform.center {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(bundle_hash);
    out
}

pub fn decode_checkpoint(
    bytes: &[u8],
) -> Result<(Mlp, NormalizeTransform, [u8; 32]), FieldError> {
    let mut r = Reader { bytes, at: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(FieldError::Corrupt(format!("bad magic {magic:?}")));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FieldError::Corrupt(format!(
            "version {version} is not supported (expected {VERSION})"
        )));
    }
    let omega = r.f64()?;
    let n_dims = r.u32()? as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(FieldError::Corrupt(format!("{n_dims} layer sizes")));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        let d = r.u32()? as usize;
        if d == 0 {
            return Err(FieldError::Corrupt("zero-width layer".into()));
        }
        dims.push(d);
    }
    let mut mlp = Mlp::new(&dims, omega, 0);
    let mut params = Vec::with_capacity(mlp.param_count());
    for _ in 0..mlp.param_count() {
        params.push(r.f64()?);
    }
    mlp.set_params_flat(&params)?;
    let scale = r.f64()?;
    let center = [r.f64()?, r.f64()?, r.f64()?];
    let bundle_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
    if r.at != bytes.len() {
        return Err(FieldError::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - r.at
        )));
    }
    Ok((mlp, NormalizeTransform { scale, center }, bundle_hash))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FieldError> {
        if self.at + n > self.bytes.len() {
            return Err(FieldError::Corrupt("truncated file".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FieldError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FieldError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transform() -> NormalizeTransform {
        NormalizeTransform { scale: 2.5, center: [0.1, -0.2, 0.3] }
    }

    fn hash() -> [u8; 32] {
        std::array::from_fn(|i| i as u8)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mlp = Mlp::new(&[3, 12, 7, 9], 30.0, 99);
        let bytes = encode_checkpoint(&mlp, &transform(), &hash());
        let (back, t, h) = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back.dims(), mlp.dims());
        assert_eq!(back.omega(), mlp.omega());
        assert_eq!(t, transform());
        assert_eq!(h, hash());
        let a = mlp.params_flat();
        let b = back.params_flat();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // encoding is deterministic
        assert_eq!(bytes, encode_checkpoint(&back, &t, &h));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.nfck");
        let mlp = Mlp::new(&[3, 5, 9], 30.0, 4);
        save_checkpoint(&path, &mlp, &transform(), &hash()).unwrap();
        let (back, _, h) = load_checkpoint(&path).unwrap();
        assert_eq!(back.params_flat(), mlp.params_flat());
        assert_eq!(h, hash());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let mlp = Mlp::new(&[3, 5, 9], 30.0, 4);
        let good = encode_checkpoint(&mlp, &transform(), &hash());

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_checkpoint(&bad_magic), Err(FieldError::Corrupt(_))));

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(matches!(decode_checkpoint(&bad_version), Err(FieldError::Corrupt(_))));

        let truncated = &good[..good.len() - 3];
        assert!(matches!(decode_checkpoint(truncated), Err(FieldError::Corrupt(_))));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(decode_checkpoint(&trailing), Err(FieldError::Corrupt(_))));
    }
}
