pub mod analyze;
pub mod preprocess;
pub mod selfcheck;
pub mod train;

use anyhow::{Context, Result};

/// The seed from NEURFRAME_SEED, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var("NEURFRAME_SEED") {
        Ok(text) => Ok(Some(text.trim().parse().with_context(|| {
            format!("NEURFRAME_SEED is not an unsigned integer: '{text}'")
        })?)),
        Err(_) => Ok(None),
    }
}

/// Seed precedence for commands without a config file: flag, then
/// NEURFRAME_SEED, then 0.
pub fn pick_seed(flag: Option<u64>, env: Option<u64>) -> u64 {
    flag.or(env).unwrap_or(0)
}
