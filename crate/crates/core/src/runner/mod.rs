//! Experiment runner: TOML configs, dispatch to the numerical modules, CSV and
//! SVG output, and a run manifest written last.
//!
//! A config looks like
//!
//! ```toml
//! kind = "gap-scan"
//! seed = 0
//! output_dir = "out/gap"
//!
//! [params]
//! map = "baker"
//! ns = [27, 81, 243]
//! delta = 1.0
//! ```
//!
//! `kind` may be omitted when the caller supplies it. Parameters are listed
//! per kind in the README.

mod experiments;
mod params;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use experiments::{named_symbol, SYMBOL_NAMES};
use params::{line_of, Params};

/// File name of the manifest inside the output directory.
pub const MANIFEST_NAME: &str = "manifest.json";

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "OSLAB_OUT";

const DEFAULT_OUT: &str = "oslab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GeometryCheck,
    Orbit,
    TrappedSet,
    Quantize,
    GapScan,
    ResolventScan,
    Spectrum,
    Wave,
    ContourTest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::GeometryCheck,
        Self::Orbit,
        Self::TrappedSet,
        Self::Quantize,
        Self::GapScan,
        Self::ResolventScan,
        Self::Spectrum,
        Self::Wave,
        Self::ContourTest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GeometryCheck => "geometry-check",
            Self::Orbit => "orbit",
            Self::TrappedSet => "trapped-set",
            Self::Quantize => "quantize",
            Self::GapScan => "gap-scan",
            Self::ResolventScan => "resolvent-scan",
            Self::Spectrum => "spectrum",
            Self::Wave => "wave",
            Self::ContourTest => "contour-test",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
            format!("unknown kind `{s}` (expected one of {})", names.join(", "))
        })
    }
}

fn location(line: &Option<usize>, field: &Option<String>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(" at line {l}, field `{f}`"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(f)) => format!(" in field `{f}`"),
        (None, None) => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error{}: {msg}", location(.line, .field))]
    Config {
        line: Option<usize>,
        field: Option<String>,
        msg: String,
    },
    #[error("{context}: {msg}")]
    Numeric { context: String, msg: String },
    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for config errors, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 1,
            Self::Numeric { .. } => 2,
            Self::Io { .. } => 3,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config {
            line: None,
            field: None,
            msg: msg.into(),
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::Numeric {
            context: context.into(),
            msg: err.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub params: toml::Table,
    source: String,
    /// Relative paths inside `params` resolve against this directory.
    base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parses config text. `kind` fills in a missing `kind` key and must
    /// agree with it when both are present.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| RunError::Config {
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
            field: None,
            msg: e.message().trim().replace('\n', "; "),
        })?;
        let err = |key: &str, msg: String| RunError::Config {
            line: line_of(text, None, key),
            field: Some(key.to_string()),
            msg,
        };
        for key in table.keys() {
            if !["kind", "seed", "output_dir", "params"].contains(&key.as_str()) {
                return Err(err(key, format!("unknown key `{key}`")));
            }
        }
        let file_kind = match table.get("kind") {
            None => None,
            Some(toml::Value::String(s)) => Some(s.parse::<ExperimentKind>().map_err(|m| err("kind", m))?),
            Some(_) => return Err(err("kind", "expected a string".into())),
        };
        let kind = match (file_kind, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(err("kind", format!("config declares `{a}` but `{b}` was requested")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(RunError::config("missing `kind`")),
        };
        let seed = match table.get("seed") {
            None => 0,
            Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(err("seed", "expected a nonnegative integer".into())),
        };
        let output_dir = match table.get("output_dir") {
            None => None,
            Some(toml::Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(_) => return Err(err("output_dir", "expected a nonempty string".into())),
        };
        let params = match table.get("params") {
            None => toml::Table::new(),
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => return Err(err("params", "expected a table".into())),
        };
        Ok(Self {
            kind,
            seed,
            output_dir,
            params,
            source: text.to_string(),
            base_dir: PathBuf::from("."),
        })
    }

    pub fn load(path: impl AsRef<Path>, kind: Option<ExperimentKind>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let mut cfg = Self::parse(&text, kind)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Directory against which relative paths in `params` resolve.
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    /// Sorted TOML rendering of `kind`, `seed` and `params`. The output
    /// directory is left out so moving a run does not change its digest.
    pub fn canonical(&self) -> String {
        let mut t = toml::Table::new();
        t.insert("kind".into(), toml::Value::String(self.kind.as_str().into()));
        t.insert("seed".into(), toml::Value::Integer(self.seed as i64));
        t.insert("params".into(), toml::Value::Table(self.params.clone()));
        toml::to_string(&t).expect("tables always serialize")
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    pub(crate) fn params(&self) -> Params<'_> {
        Params::new(&self.params, &self.source, &self.base_dir)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub plot: bool,
    /// One worker thread; outputs are then reproducible byte for byte.
    pub serial: bool,
    /// Worker threads; defaults to the number of cores.
    pub workers: Option<usize>,
    /// Takes precedence over the config's `output_dir`.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputFile>,
    /// Headline numbers of the run.
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| RunError::io(path, std::io::Error::other(e)))
    }

    pub fn digest_of(&self, name: &str) -> Option<&str> {
        self.outputs.iter().find(|o| o.path == name).map(|o| o.sha256.as_str())
    }
}

/// A file produced by an experiment, relative to the output directory.
#[derive(Debug, Clone)]
pub(crate) struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub files: Vec<Artifact>,
    pub plots: Vec<Artifact>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

/// Output directory: explicit option, then the config's `output_dir`
/// (relative to the config file), then `oslab-out`.
pub fn output_dir(config: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| config.output_dir.as_ref().map(|d| config.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Validates the parameters, runs the experiment and writes its outputs.
/// The manifest is written last, through a temporary file and a rename, so a
/// directory without `manifest.json` holds an interrupted run.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let plan = experiments::Plan::from_config(config)?;
    let workers = if opts.serial {
        1
    } else {
        match opts.workers {
            Some(0) => return Err(RunError::config("--workers must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    };
    let dir = output_dir(config, opts);
    fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    let manifest_path = dir.join(MANIFEST_NAME);
    match fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(RunError::io(&manifest_path, e)),
    }

    let started_at = Utc::now().to_rfc3339();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::numeric("thread pool", e))?;
    let outcome = pool.install(|| plan.execute(config, opts.plot))?;

    let mut outputs = Vec::new();
    for art in outcome.files.iter().chain(&outcome.plots) {
        let path = dir.join(&art.name);
        fs::write(&path, &art.bytes).map_err(|e| RunError::io(&path, e))?;
        outputs.push(OutputFile {
            path: art.name.clone(),
            sha256: sha256_hex(&art.bytes),
            bytes: art.bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        kind: config.kind,
        config_digest: config.digest(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        workers,
        started_at,
        finished_at: Utc::now().to_rfc3339(),
        outputs,
        summary: outcome.summary,
    };
    let tmp = dir.join(format!("{MANIFEST_NAME}.tmp"));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let write_tmp = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()
    };
    write_tmp().map_err(|e| RunError::io(&tmp, e))?;
    fs::rename(&tmp, &manifest_path).map_err(|e| RunError::io(&manifest_path, e))?;
    Ok(manifest)
}
