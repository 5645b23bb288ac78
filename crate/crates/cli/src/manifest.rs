//! Run manifests: enough provenance to reproduce any invocation.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::path::{Path, PathBuf};

use parent_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// What produced an output: the subcommand, its flags, the RNG family
/// and seed, the worker count, and a SHA-256 digest of every input
/// file. Written next to the output file as `<out>.manifest.json`, or
/// to stderr when results go to stdout.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub rng: &'static str,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub flags: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, jobs: usize) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: "chacha8",
            seed: None,
            jobs,
            flags: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Display) {
        self.flags.insert(name.to_string(), value.to_string());
    }

    /// Records an input file under its display path with its SHA-256
    /// digest.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let mut hasher = Sha256::new();
        let mut file = File::open(path)
            .map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?;
        std::io::copy(&mut file, &mut hasher)?;
        self.inputs.insert(
            path.display().to_string(),
            format!("{:x}", hasher.finalize()),
        );
        Ok(())
    }

    /// Writes the manifest beside `out`, or to stderr for stdout runs.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let rendered = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("cannot render manifest: {e}")))?;
        match out {
            Some(path) => {
                let manifest_path = PathBuf::from(format!("{}.manifest.json", path.display()));
                std::fs::write(manifest_path, rendered + "\n")?;
            }
            None => eprintln!("{rendered}"),
        }
        Ok(())
    }
}
