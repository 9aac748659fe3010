//! Command-line flags, the JSON config file, and their merge into a
//! validated [`RunConfig`]. Flags win over the file, the file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use zn_elliptic::{CoefficientField, ProblemParams, Site};

use crate::error::CliError;

/// Environment variable naming the directory reports go to when `--out` is
/// not given.
pub const OUT_DIR_ENV: &str = "ZN_ELLIPTIC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "zn-elliptic",
    version,
    about = "Positive solutions and bubble decompositions for lattice elliptic equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize J1 on {J2 = 1} and report λ0, λ, b̃ and the residual.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Where to write the minimizer (default: next to the report).
        #[arg(long)]
        solution_csv: Option<PathBuf>,
    },
    /// Solve once per β and tabulate b̃ against its bracket.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Split a function sequence into weak limit and bubbles.
    Decompose {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: DecomposeArgs,
    },
    /// Run the randomized lemma checks.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Random functions for the norm inequalities.
        #[arg(long)]
        functions: Option<usize>,
        /// Finite-difference trials per (N, p, q).
        #[arg(long)]
        fd_trials: Option<usize>,
    },
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; any flag given on the command line overrides it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long = "q")]
    pub q: Option<f64>,
    /// Constant coefficient a ≡ ã.
    #[arg(long)]
    pub a_const: Option<f64>,
    /// Constant coefficient b.
    #[arg(long)]
    pub b_const: Option<f64>,
    /// Constraint weight; a comma-separated grid for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    /// Radius of the l1 box.
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the wall-time field empty so reports compare byte for byte.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Default, Args)]
pub struct DecomposeArgs {
    /// Sequence manifest (JSON listing one CSV per term).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Vanishing threshold (default: sup of the last term / 1000).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Radius of the window profiles are read through.
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub max_bubbles: Option<usize>,
    /// Stop once a profile's limit energy falls below this.
    #[arg(long)]
    pub energy_floor: Option<f64>,
    /// λ0 of the constrained problem, for the height-bound diagnostics.
    #[arg(long)]
    pub lambda0: Option<f64>,
}

/// A coefficient field as written in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    RadialLimit { limit: f64, profile: Vec<ProfileEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub site: Vec<i64>,
    pub delta: f64,
}

impl FieldSpec {
    pub fn build(&self) -> zn_elliptic::Result<CoefficientField> {
        match self {
            FieldSpec::Constant { value } => CoefficientField::constant(*value),
            FieldSpec::RadialLimit { limit, profile } => CoefficientField::radial_limit(
                *limit,
                profile.iter().map(|e| (Site::new(e.site.clone()), e.delta)).collect(),
            ),
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, FieldSpec::Constant { .. })
    }
}

/// One β or a grid of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    One(f64),
    Grid(Vec<f64>),
}

impl BetaSpec {
    fn values(&self) -> Vec<f64> {
        match self {
            BetaSpec::One(b) => vec![*b],
            BetaSpec::Grid(g) => g.clone(),
        }
    }
}

/// The config file. Every key is optional; unknown keys are rejected. The
/// report echoes the resolved run in this same format, so an echo can be fed
/// back through `--config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bubbles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_trials: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Sweep,
    Decompose,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Decompose => "decompose",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecomposeSettings {
    pub manifest: PathBuf,
    pub sigma: Option<f64>,
    pub window: u32,
    pub max_bubbles: usize,
    pub energy_floor: Option<f64>,
    pub lambda0: Option<f64>,
}

/// A fully resolved and validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub a: FieldSpec,
    pub b: FieldSpec,
    pub betas: Vec<f64>,
    pub radius: u32,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub deterministic: bool,
    pub solution_csv: Option<PathBuf>,
    pub decompose: Option<DecomposeSettings>,
    pub functions: usize,
    pub fd_trials: usize,
}

pub mod defaults {
    pub const DIM: usize = 2;
    pub const P: f64 = 2.0;
    pub const Q: f64 = 4.0;
    pub const BETA: f64 = 1.0;
    pub const RADIUS: u32 = 8;
    pub const TOL: f64 = 1e-8;
    pub const MAX_ITER: usize = 200_000;
    pub const SEED: u64 = 0;
    pub const WINDOW: u32 = 8;
    pub const FUNCTIONS: usize = 1000;
    pub const FD_TRIALS: usize = 100;
}

impl RunConfig {
    /// The problem with `β` set to the first grid entry.
    pub fn params(&self) -> Result<ProblemParams, CliError> {
        let a = self.a.build().map_err(|e| CliError::Config(format!("`a`: {e}")))?;
        let b = self.b.build().map_err(|e| CliError::Config(format!("`b`: {e}")))?;
        ProblemParams::new(self.dim, self.p, self.q, a, b, self.betas[0]).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The run in config-file form, with every setting that affects it.
    pub fn echo(&self) -> ConfigFile {
        let mut c = ConfigFile {
            subcommand: Some(self.mode.name().into()),
            dim: Some(self.dim),
            p: Some(self.p),
            q: Some(self.q),
            a: Some(self.a.clone()),
            b: Some(self.b.clone()),
            beta: Some(if self.mode == Mode::Sweep {
                BetaSpec::Grid(self.betas.clone())
            } else {
                BetaSpec::One(self.betas[0])
            }),
            seed: Some(self.seed),
            out: Some(self.out.clone()),
            deterministic: Some(self.deterministic),
            ..ConfigFile::default()
        };
        match self.mode {
            Mode::Solve | Mode::Sweep => {
                c.radius = Some(self.radius);
                c.tol = Some(self.tol);
                c.max_iter = Some(self.max_iter);
                c.solution_csv = self.solution_csv.clone();
            }
            Mode::Decompose => {
                let d = self.decompose.as_ref().expect("decompose settings");
                c.manifest = Some(d.manifest.clone());
                c.sigma = d.sigma;
                c.window = Some(d.window);
                c.max_bubbles = Some(d.max_bubbles);
                c.energy_floor = d.energy_floor;
                c.lambda0 = d.lambda0;
            }
            Mode::Verify => {
                c.functions = Some(self.functions);
                c.fd_trials = Some(self.fd_trials);
            }
        }
        c
    }
}

fn default_out(mode: Mode) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{}-report.json", mode.name()))
}

/// `r.json` -> `r.solution.csv`.
fn solution_path_for(out: &Path) -> PathBuf {
    out.with_extension("solution.csv")
}

impl Cli {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let (mode, common) = match &self.command {
            Command::Solve { common, .. } => (Mode::Solve, common),
            Command::Sweep { common } => (Mode::Sweep, common),
            Command::Decompose { common, .. } => (Mode::Decompose, common),
            Command::Verify { common, .. } => (Mode::Verify, common),
        };
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let pick = |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let field = |flag: Option<f64>, file: &Option<FieldSpec>| match flag {
            Some(value) => FieldSpec::Constant { value },
            None => file.clone().unwrap_or(FieldSpec::Constant { value: 1.0 }),
        };
        let out = common
            .out
            .clone()
            .or(file.out.clone())
            .unwrap_or_else(|| default_out(mode));
        let mut cfg = RunConfig {
            mode,
            dim: common.dim.or(file.dim).unwrap_or(defaults::DIM),
            p: pick(common.p, file.p, defaults::P),
            q: pick(common.q, file.q, defaults::Q),
            a: field(common.a_const, &file.a),
            b: field(common.b_const, &file.b),
            betas: common
                .beta
                .clone()
                .or_else(|| file.beta.as_ref().map(BetaSpec::values))
                .unwrap_or_else(|| vec![defaults::BETA]),
            radius: common.radius.or(file.radius).unwrap_or(defaults::RADIUS),
            tol: pick(common.tol, file.tol, defaults::TOL),
            max_iter: common.max_iter.or(file.max_iter).unwrap_or(defaults::MAX_ITER),
            seed: common.seed.or(file.seed).unwrap_or(defaults::SEED),
            deterministic: common.deterministic || file.deterministic.unwrap_or(false),
            solution_csv: None,
            decompose: None,
            functions: file.functions.unwrap_or(defaults::FUNCTIONS),
            fd_trials: file.fd_trials.unwrap_or(defaults::FD_TRIALS),
            out,
        };
        match &self.command {
            Command::Solve { solution_csv, .. } => {
                cfg.solution_csv = Some(
                    solution_csv
                        .clone()
                        .or(file.solution_csv.clone())
                        .unwrap_or_else(|| solution_path_for(&cfg.out)),
                );
            }
            Command::Decompose { args, .. } => {
                let manifest = args.manifest.clone().or(file.manifest.clone());
                cfg.decompose = Some(DecomposeSettings {
                    manifest: manifest.ok_or_else(|| CliError::Config("`manifest`: required for decompose".into()))?,
                    sigma: args.sigma.or(file.sigma),
                    window: args.window.or(file.window).unwrap_or(defaults::WINDOW),
                    max_bubbles: args
                        .max_bubbles
                        .or(file.max_bubbles)
                        .unwrap_or(zn_elliptic::decompose::DEFAULT_MAX_BUBBLES),
                    energy_floor: args.energy_floor.or(file.energy_floor),
                    lambda0: args.lambda0.or(file.lambda0),
                });
            }
            Command::Verify {
                functions, fd_trials, ..
            } => {
                cfg.functions = functions.unwrap_or(cfg.functions);
                cfg.fd_trials = fd_trials.unwrap_or(cfg.fd_trials);
            }
            Command::Sweep { .. } => {}
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

/// Collects every problem with the configuration into one diagnostic.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut issues: Vec<String> = Vec::new();
    let mut note = |field: &str, msg: String| issues.push(format!("`{field}`: {msg}"));
    if cfg.dim < 2 {
        note("dim", format!("must be at least 2, got {}", cfg.dim));
    }
    if !(cfg.p >= 2.0) || !cfg.p.is_finite() {
        note("p", format!("must be finite and at least 2, got {}", cfg.p));
    }
    if !(cfg.q > cfg.p) || !cfg.q.is_finite() {
        note(
            "q",
            format!("must be finite and larger than p = {}, got {}", cfg.p, cfg.q),
        );
    }
    if cfg.betas.is_empty() {
        note("beta", "no values given".into());
    }
    for &b in &cfg.betas {
        if !(b > 0.0) || !b.is_finite() {
            note("beta", format!("must be positive and finite, got {b}"));
        }
    }
    if cfg.mode != Mode::Sweep && cfg.betas.len() > 1 {
        note(
            "beta",
            format!("{} takes a single value, got {}", cfg.mode.name(), cfg.betas.len()),
        );
    }
    if cfg.radius < 1 {
        note("radius", "must be at least 1".into());
    }
    if !(cfg.tol > 0.0) || !cfg.tol.is_finite() {
        note("tol", format!("must be positive, got {}", cfg.tol));
    }
    for (name, spec) in [("a", &cfg.a), ("b", &cfg.b)] {
        match spec.build() {
            Err(e) => note(name, e.to_string()),
            Ok(f) => {
                if let Some(d) = f.profile_dim().filter(|&d| d != cfg.dim) {
                    note(name, format!("profile sites have dimension {d}, expected {}", cfg.dim));
                }
            }
        }
    }
    if matches!(cfg.mode, Mode::Solve | Mode::Sweep) && !cfg.a.is_constant() {
        note(
            "a",
            "J1 needs a constant coefficient; use {\"kind\": \"constant\"}".into(),
        );
    }
    if let Some(d) = &cfg.decompose {
        if d.window < 1 {
            note("window", "must be at least 1".into());
        }
        if let Some(s) = d.sigma.filter(|s| !(*s > 0.0) || !s.is_finite()) {
            note("sigma", format!("must be positive, got {s}"));
        }
        if let Some(l) = d.lambda0.filter(|l| !(*l > 0.0) || !l.is_finite()) {
            note("lambda0", format!("must be positive, got {l}"));
        }
    }
    if cfg.mode == Mode::Verify {
        if cfg.functions < 10 {
            note("functions", format!("need at least 10, got {}", cfg.functions));
        }
        if cfg.fd_trials < 1 {
            note("fd_trials", "need at least 1".into());
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(issues.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("zn-elliptic").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"dim": 3, "p": 2.5, "q": 5, "beta": [0.5, 2], "a": {"kind": "constant", "value": 3}}"#,
        )
        .unwrap();
        let cfg = parse(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--q",
            "6",
            "--out",
            "x.json",
        ])
        .resolve()
        .unwrap();
        assert_eq!((cfg.dim, cfg.p, cfg.q), (3, 2.5, 6.0));
        assert_eq!(cfg.betas, vec![0.5, 2.0]);
        assert_eq!(cfg.a, FieldSpec::Constant { value: 3.0 });
        assert_eq!(cfg.out, PathBuf::from("x.json"));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"dimension": 3}"#).unwrap();
        let err = parse(&["solve", "--config", path.to_str().unwrap()])
            .resolve()
            .unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err}");
        std::fs::write(&path, r#"{"a": {"kind": "constant", "value": 1, "limit": 2}}"#).unwrap();
        assert!(matches!(
            parse(&["solve", "--config", path.to_str().unwrap()]).resolve(),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn diagnostics_name_every_bad_field() {
        let err = parse(&["solve", "--p", "1.5", "--q", "1", "--beta=-1", "--tol", "0"])
            .resolve()
            .unwrap_err();
        let msg = err.to_string();
        for field in ["`p`", "`q`", "`beta`", "`tol`"] {
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn solve_needs_constant_a_and_one_beta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"a": {"kind": "radial_limit", "limit": 1, "profile": [{"site": [0, 0], "delta": 0.5}]}}"#,
        )
        .unwrap();
        assert!(parse(&["solve", "--config", path.to_str().unwrap()]).resolve().is_err());
        assert!(
            parse(&["decompose", "--config", path.to_str().unwrap(), "--manifest", "m.json"])
                .resolve()
                .is_ok()
        );
        assert!(parse(&["solve", "--beta", "1,2"]).resolve().is_err());
    }

    #[test]
    fn echo_reproduces_the_run() {
        let cfg = parse(&[
            "solve", "--dim", "3", "--p", "3", "--q", "5", "--beta", "2", "--out", "r.json",
        ])
        .resolve()
        .unwrap();
        assert_eq!(cfg.solution_csv, Some(PathBuf::from("r.solution.csv")));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("echo.json");
        std::fs::write(&path, serde_json::to_string(&cfg.echo()).unwrap()).unwrap();
        let again = parse(&["solve", "--config", path.to_str().unwrap()]).resolve().unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn decompose_requires_a_manifest() {
        assert!(matches!(parse(&["decompose"]).resolve(), Err(CliError::Config(_))));
    }
}
