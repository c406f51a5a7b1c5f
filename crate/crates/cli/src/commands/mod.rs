//! Subcommands and the plumbing they share: parameter resolution from a
//! config file plus flags, run manifests, and exit-code mapping.

pub mod bandwidth;
pub mod bench;
pub mod cluster;
pub mod eval;
pub mod gen;
pub mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use modeshift::io::write_atomic;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DIAGNOSTIC: u8 = 3;

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn diagnostic(message: impl Into<String>) -> Self {
        Self {
            code: Self::DIAGNOSTIC,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: Self::FAILED,
            message: message.into(),
        }
    }
}

impl From<modeshift::Error> for CliError {
    fn from(e: modeshift::Error) -> Self {
        use modeshift::Error as E;
        let code = match e {
            E::InvalidArgument(_)
            | E::DimensionMismatch { .. }
            | E::UnsupportedSize(_)
            | E::Parse { .. }
            | E::Io(_) => Self::USAGE,
            E::AlgorithmStall { .. } => Self::DIAGNOSTIC,
            E::NonSmoothPoint { .. } => Self::FAILED,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Builds the effective parameters: values from `config` (a JSON object, or
/// a run manifest whose `params` field is used) overlaid by every flag that
/// was given on the command line. Flags that are absent serialize to `null`
/// or `false` and leave the config value in place.
pub fn resolve<A: Serialize, P: DeserializeOwned>(args: &A, config: Option<&Path>) -> CliResult<P> {
    let mut merged = match config {
        Some(path) => load_config(path)?,
        None => Map::new(),
    };
    let flags = serde_json::to_value(args).map_err(|e| CliError::internal(e.to_string()))?;
    if let Value::Object(flags) = flags {
        for (key, value) in flags {
            if !matches!(value, Value::Null | Value::Bool(false)) {
                merged.insert(key, value);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| {
        let text = e.to_string();
        match text.strip_prefix("missing field `") {
            Some(rest) => {
                let name = rest.split('`').next().unwrap_or_default().replace('_', "-");
                CliError::usage(format!("missing required option --{name}"))
            }
            None => CliError::usage(format!("invalid parameters: {text}")),
        }
    })
}

fn load_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut m) if m.contains_key("params") => m.remove("params").unwrap(),
        v => v,
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::usage(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))
}

/// Wall-clock phases of one run, reported in the manifest.
#[derive(Debug)]
pub struct Clock {
    start: Instant,
    phase: Instant,
    phases: Map<String, Value>,
}

impl Clock {
    pub fn start() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            phase: now,
            phases: Map::new(),
        }
    }

    /// Records the time since the previous lap under `name`.
    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        let secs = (now - self.phase).as_secs_f64();
        self.phases.insert(format!("{name}_seconds"), secs.into());
        self.phase = now;
    }

    fn finish(mut self) -> Value {
        let total = self.start.elapsed().as_secs_f64();
        self.phases.insert("total_seconds".into(), total.into());
        Value::Object(self.phases)
    }
}

/// Run record written next to a command's outputs.
///
/// Everything except `wall_time` is a function of `params`, so re-running
/// with `--config <manifest>` reproduces the outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, P: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub params: &'a P,
    pub seeds: Value,
    pub outputs: Vec<String>,
    pub results: Value,
    pub wall_time: Value,
}

impl<'a, P: Serialize> Manifest<'a, P> {
    pub fn new(command: &'a str, params: &'a P) -> Self {
        Self {
            command,
            version: modeshift::VERSION,
            params,
            seeds: Value::Object(Map::new()),
            outputs: Vec::new(),
            results: Value::Object(Map::new()),
            wall_time: Value::Null,
        }
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(mut self, path: &Path, clock: Clock) -> CliResult {
        self.wall_time = clock.finish();
        let mut text =
            serde_json::to_string_pretty(&self).map_err(|e| CliError::internal(e.to_string()))?;
        text.push('\n');
        write_text(path, &text)
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// `header` followed by one line per row of already formatted cells.
pub fn csv_text(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    writeln!(out, "{header}").unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Shortest decimal that reads back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn default_out() -> PathBuf {
    PathBuf::from(".")
}
