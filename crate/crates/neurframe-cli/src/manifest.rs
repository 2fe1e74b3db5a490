//! Run manifest: the resolved settings, input digests, outputs, and timings
//! of one command, written next to its artifacts. The settings and digests
//! are enough to replay the run bit for bit; timings are provenance only.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// RNG seed the command resolved, if it uses one.
    pub seed: Option<u64>,
    /// Fully resolved settings after flag/file/env precedence.
    pub config: serde_json::Value,
    /// Input name -> hex sha256 (or a descriptor for generated inputs).
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u64>,
    /// Command-specific result counters.
    pub stats: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "neurframe".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: None,
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
            stats: serde_json::Value::Null,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
        Ok(())
    }
}

/// Stopwatch for the per-stage timing map.
pub struct Stage {
    started: Instant,
}

impl Stage {
    pub fn start() -> Self {
        Stage { started: Instant::now() }
    }

    pub fn record(self, manifest: &mut RunManifest, name: &str) {
        let ms = self.started.elapsed().as_millis().min(u64::MAX as u128) as u64;
        manifest.timings_ms.insert(name.to_string(), ms);
    }
}
