use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use vqederiv::Backend;

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub role: String,
    /// File path, or `bundled:<name>` for built-in inputs.
    pub path: String,
    pub sha256: String,
}

impl InputRecord {
    pub fn new(role: &str, path: &str, contents: &str) -> InputRecord {
        InputRecord { role: role.into(), path: path.into(), sha256: hex::encode(Sha256::digest(contents.as_bytes())) }
    }
}

/// Provenance embedded in every output. Timings are opt-in so that reruns
/// with identical inputs produce identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub backend: Option<Backend>,
    pub seed: u64,
    pub settings: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, timings: bool) -> RunManifest {
        RunManifest {
            tool: "vqederiv",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            inputs: Vec::new(),
            backend: None,
            seed,
            settings: BTreeMap::new(),
            timings: timings.then(BTreeMap::new),
            clock: timings.then(Instant::now),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.settings.insert(key.into(), serde_json::to_value(value).expect("settings serialize"));
    }

    /// Records the time since the previous mark under `stage`.
    pub fn mark(&mut self, stage: &str) {
        if let (Some(t), Some(clock)) = (self.timings.as_mut(), self.clock.as_mut()) {
            t.insert(stage.into(), clock.elapsed().as_secs_f64());
            *clock = Instant::now();
        }
    }

    /// CSV comment lines carrying the manifest.
    pub fn csv_header(&self) -> String {
        let json = serde_json::to_string(self).expect("manifest serializes");
        format!("# {json}\n")
    }
}
