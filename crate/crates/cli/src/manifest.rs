//! Function sequences on disk: a JSON manifest listing one CSV per term.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zn_elliptic::{FunctionSequence, LatticeBox};

use crate::csv_io::{emit_solution_csv, read_function};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceManifest {
    pub dim: usize,
    /// Energy level `c` the sequence is taken at, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    pub terms: Vec<ManifestTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestTerm {
    /// Radius of the l1 box the term lives on.
    pub radius: u32,
    /// CSV file, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
}

pub fn read_manifest(path: &Path) -> Result<SequenceManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

pub fn load_sequence(path: &Path) -> Result<FunctionSequence, CliError> {
    let manifest = read_manifest(path)?;
    if manifest.terms.is_empty() {
        return Err(CliError::format(path, "manifest lists no terms"));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut terms = Vec::with_capacity(manifest.terms.len());
    for t in &manifest.terms {
        let domain = LatticeBox::new(manifest.dim, t.radius).map_err(|e| CliError::format(path, e))?;
        terms.push(read_function(&base.join(&t.path), &domain)?);
    }
    FunctionSequence::new(terms, manifest.level).map_err(|e| CliError::format(path, e))
}

/// Writes `term_001.csv`, ... and `manifest.json` into `dir`; returns the
/// manifest path.
pub fn write_sequence(seq: &FunctionSequence, dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut terms = Vec::with_capacity(seq.len());
    for (n, t) in seq.terms().iter().enumerate() {
        let name = PathBuf::from(format!("term_{:03}.csv", n + 1));
        emit_solution_csv(t, &dir.join(&name))?;
        terms.push(ManifestTerm {
            radius: t.domain().radius(),
            path: name,
        });
    }
    let manifest = SequenceManifest {
        dim: seq.dim(),
        level: seq.level(),
        terms,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
