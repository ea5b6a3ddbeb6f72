//! Command-line front end for `willmore-core`.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure or aborted run (partial outputs are still written), 4 I/O error.

pub mod app;
pub mod config;
pub mod meshio;
pub mod output;

use std::path::PathBuf;

pub use app::run;
pub use config::{ConfigError, RunConfig};
pub use meshio::{parse_mesh, MeshFileError, MeshFormat};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("mesh file: {0}")]
    MeshFile(#[from] MeshFileError),
    #[error("input: {0}")]
    Input(willmore_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(willmore_core::Error),
    #[error("run aborted ({reason}); partial outputs in {}", dir.display())]
    Aborted { reason: String, dir: PathBuf },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// Splits core errors into bad input and failures of the computation itself.
    pub fn from_core(e: willmore_core::Error) -> Self {
        use willmore_core::Error as E;
        match e {
            E::InvalidParams(_)
            | E::BadExponent(_)
            | E::DimensionMismatch { .. }
            | E::IndexOutOfRange { .. }
            | E::NonManifold { .. }
            | E::DegenerateTriangle { .. }
            | E::NonSymmetricInput => CliError::Input(e),
            _ => CliError::Numerical(e),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::MeshFile(MeshFileError::Io { .. }) => 4,
            CliError::MeshFile(_) => 2,
            CliError::Numerical(_) | CliError::Aborted { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}
