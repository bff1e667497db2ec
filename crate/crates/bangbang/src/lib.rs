//! File-based front end for `bangbang-core`: TOML run configurations,
//! two-column inputs and commented CSV output.

pub mod config;
pub mod io;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse, ConfigError, Resolved, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error(transparent)]
    Input(#[from] io::InputError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{scenario}: {context}: {source}")]
    Numeric { scenario: &'static str, context: String, source: bangbang_core::Error },
}

impl RunError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric { .. } => 3,
            _ => 2,
        }
    }
}

/// Load a configuration file; relative paths inside it resolve against its
/// directory.
pub fn load(path: &Path) -> Result<Resolved, RunError> {
    let name = path.display().to_string();
    let src = fs::read_to_string(path).map_err(|source| RunError::Io { path: name.clone(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&src, &base).map_err(|source| RunError::Config { path: name, source })
}

/// Run a configuration file and write its table. Returns the output path.
pub fn run_file(path: &Path, output: Option<&Path>) -> Result<PathBuf, RunError> {
    let r = load(path)?;
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| r.output_path());
    let table = scenario::run(&r)?;
    table.write(&out).map_err(|source| RunError::Io { path: out.display().to_string(), source })?;
    Ok(out)
}
