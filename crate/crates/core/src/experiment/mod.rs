//! Config-driven experiments: TOML in, a directory of CSV or JSON tables out.

use std::path::{Path, PathBuf};

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, Format, Solver};
pub use output::{RunOutput, Table};
pub use presets::{preset, run_preset, PresetRun, PRESETS};
pub use runner::{execute, run_to_dir};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OPINET_OUT";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot parse config: {0}")]
    ConfigParse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("unknown preset `{0}` (available: {list})", list = PRESETS.join(", "))]
    UnknownPreset(String),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigParse(_) => 2,
            Self::Validation(_) => 3,
            Self::Io { .. } => 4,
            Self::UnknownPreset(_) => 5,
        }
    }
}

/// Output directory: the explicit one, else `$OPINET_OUT`, else `out`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
