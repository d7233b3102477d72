//! Run manifests. Every dataset header embeds the manifest hash, computed
//! over the parameters that determine file contents (not timestamps or
//! output locations), so identical parameters give identical files.

use std::path::Path;

use ppuf_core::GridConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::format::Encoding;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridManifest {
    pub ex2_step: f64,
    pub ex2_count: usize,
    pub ex2_start_index: usize,
    pub dphi_step: f64,
    pub dphi_count: usize,
    pub dphi_start_index: usize,
}

impl From<&GridConfig> for GridManifest {
    fn from(g: &GridConfig) -> Self {
        Self {
            ex2_step: g.ex2_step,
            ex2_count: g.ex2_count,
            ex2_start_index: g.ex2_start_index,
            dphi_step: g.dphi_step,
            dphi_count: g.dphi_count,
            dphi_start_index: g.dphi_start_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub grid: GridManifest,
    pub pufs: usize,
    pub cells: usize,
    pub repeats: usize,
    pub noise_ex2: f64,
    pub noise_phase: f64,
    pub encoding: String,
    pub created_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        master_seed: u64,
        grid: &GridConfig,
        pufs: usize,
        cells: usize,
        repeats: usize,
        noise_ex2: f64,
        noise_phase: f64,
        encoding: Encoding,
    ) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            master_seed,
            grid: grid.into(),
            pufs,
            cells,
            repeats,
            noise_ex2,
            noise_phase,
            encoding: encoding.to_string(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
        }
    }

    /// Canonical `key=value` lines of the content-determining fields.
    pub fn canonical(&self) -> String {
        let g = &self.grid;
        format!(
            "tool_version={}\nmaster_seed={}\npufs={}\ncells={}\nrepeats={}\nnoise_ex2={:?}\nnoise_phase={:?}\n\
             ex2_step={:?}\nex2_count={}\nex2_start_index={}\ndphi_step={:?}\ndphi_count={}\ndphi_start_index={}\nencoding={}\n",
            self.tool_version,
            self.master_seed,
            self.pufs,
            self.cells,
            self.repeats,
            self.noise_ex2,
            self.noise_phase,
            g.ex2_step,
            g.ex2_count,
            g.ex2_start_index,
            g.dphi_step,
            g.dphi_count,
            g.dphi_start_index,
            self.encoding,
        )
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::usage(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| CliError::write(path, e))
    }
}

/// Seed of PUF `index` in a run with `master_seed`.
pub fn puf_seed(master_seed: u64, index: usize) -> u64 {
    master_seed.wrapping_add(index as u64)
}

/// Noise seed for repeat `repeat` (1-based) of a PUF.
pub fn noise_seed(puf_seed: u64, repeat: usize) -> u64 {
    puf_seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(repeat as u64)
}
