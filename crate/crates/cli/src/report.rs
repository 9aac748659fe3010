//! The JSON run report. Loading a report and emitting it again reproduces
//! the file byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const TOOL: &str = "zn-elliptic";

/// serde_json writes non-finite floats as `null`; read them back as NaN.
fn nullable<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    ChecksFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub library_version: String,
    pub subcommand: String,
    pub status: Status,
    /// SHA-256 of the config echo with output locations removed.
    pub fingerprint: String,
    pub config: ConfigFile,
    pub result: RunResult,
    /// `null` for `--deterministic` runs.
    pub wall_time_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResult {
    Solve(SolveResult),
    Sweep(SweepResult),
    Decompose(DecomposeResult),
    Verify(VerifyResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub radius: u32,
    pub sites: usize,
    pub lambda0: f64,
    pub lambda: f64,
    pub b_tilde: f64,
    #[serde(deserialize_with = "nullable")]
    pub residual: f64,
    pub constraint_defect: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: String,
    pub lambda_bounds: [f64; 2],
    pub lambda_in_bounds: bool,
    pub positive: bool,
    pub positive_sites: usize,
    pub solution_csv: PathBuf,
    /// Only computed for converged runs.
    pub box_convergence: Option<BoxConvergenceOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxConvergenceOut {
    pub larger_radius: u32,
    pub larger_lambda0: f64,
    #[serde(deserialize_with = "nullable")]
    pub relative_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub radius: u32,
    pub rows: Vec<SweepRowOut>,
    /// `max b̃ / min b̃` over converged rows.
    pub b_tilde_span: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRowOut {
    pub beta: f64,
    pub converged: bool,
    pub lambda0: Option<f64>,
    pub lambda: Option<f64>,
    pub b_tilde: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub positive: Option<bool>,
    pub b_tilde_bracket: [f64; 2],
    pub b_tilde_in_bracket: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeResult {
    pub terms: usize,
    pub k: usize,
    pub sigma: f64,
    pub remainder_sup: f64,
    /// `vanishing`, `energy_floor` or `bubble_budget`.
    pub stop: String,
    pub weak_limit: WeakLimitOut,
    pub bubbles: Vec<BubbleOut>,
    pub level: Option<f64>,
    pub energy_identity_defect: Option<f64>,
    pub separation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakLimitOut {
    pub phi: f64,
    pub sup_norm: f64,
    pub support_size: usize,
    pub unstable_sites: usize,
    pub csv: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleOut {
    pub center_track: Vec<Vec<i64>>,
    pub phi_bar: f64,
    pub mass: f64,
    pub height: f64,
    #[serde(deserialize_with = "nullable")]
    pub residual: f64,
    pub unstable_sites: usize,
    pub height_bound: Option<f64>,
    pub csv: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub seed: u64,
    pub functions: usize,
    pub fd_trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOut {
    pub name: String,
    pub passed: bool,
    #[serde(deserialize_with = "nullable")]
    pub defect: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub witness: Option<String>,
}

impl From<&zn_elliptic::CheckReport> for CheckOut {
    fn from(r: &zn_elliptic::CheckReport) -> Self {
        CheckOut {
            name: r.name.clone(),
            passed: r.passed,
            defect: r.defect,
            tolerance: r.tolerance,
            seed: r.seed,
            witness: r.witness.clone(),
        }
    }
}

/// Hex SHA-256 of the echo with `out`, `solution_csv` and `deterministic`
/// cleared, so reruns to another location share a fingerprint.
pub fn fingerprint(echo: &ConfigFile) -> String {
    let mut key = echo.clone();
    key.out = None;
    key.solution_csv = None;
    key.deterministic = None;
    let bytes = serde_json::to_vec(&key).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::format(path, e))
    }
}
