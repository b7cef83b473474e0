use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;

/// Provenance written next to results so a run can be repeated.
#[derive(Serialize)]
pub struct RunRecord {
    pub command: Vec<String>,
    pub seed: u64,
    pub version: &'static str,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunRecord {
    pub fn new(seed: u64, elapsed: Duration, outputs: Vec<String>) -> Self {
        Self {
            command: std::env::args().collect(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: elapsed.as_secs_f64(),
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("cannot write run record {}", path.display()))
    }
}

/// `out.csv` → `out.csv.run.json`.
pub fn sibling_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".run.json");
    PathBuf::from(name)
}
