//! File formats, checkpoints, configuration and the command-line pipeline
//! around [`stitchnet_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod external;
pub mod format;
pub mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stitchnet_core::pattern::Pattern;

pub use error::{Error, Result};

/// File name of the split manifest written next to a synthetic corpus.
pub const MANIFEST_FILE: &str = "split.json";

/// Which files of a corpus directory belong to which split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        let m = serde_json::from_slice(&format::read_file(&path)?).map_err(|e| Error::from(e).in_file(&path))?;
        Ok(Some(m))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self).expect("manifests always serialize");
        s.push('\n');
        format::write_file(&dir.join(MANIFEST_FILE), s.as_bytes())
    }
}

/// Reads a canonical pattern or a GarmentCodeData specification.
pub fn load_any(path: &Path) -> Result<Pattern> {
    let bytes = format::read_file(path)?;
    let p = if external::is_external(&bytes) {
        external::ingest_external(&bytes)
    } else {
        format::parse_pattern(&bytes)
    };
    p.map_err(|e| e.in_file(path))
}

/// A file, or every pattern file of a directory in path order.
pub fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        format::pattern_files(path)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")))
    }
}

/// Patterns of a corpus directory, split by its manifest when one exists
/// (train, val, test); otherwise everything is training data.
pub fn load_corpus(dir: &Path) -> Result<[Vec<Pattern>; 3]> {
    match Manifest::load(dir)? {
        Some(m) => {
            let load = |names: &[String]| names.iter().map(|n| load_any(&dir.join(n))).collect::<Result<Vec<_>>>();
            Ok([load(&m.train)?, load(&m.val)?, load(&m.test)?])
        }
        None => {
            let all = input_files(dir)?.iter().map(|p| load_any(p)).collect::<Result<Vec<_>>>()?;
            Ok([all, Vec::new(), Vec::new()])
        }
    }
}
