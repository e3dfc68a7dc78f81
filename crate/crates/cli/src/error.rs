use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fraclap_dyadic::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for solver breakdowns, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        use fraclap_dyadic::Error as E;
        match self {
            CliError::Core(E::NotConverged { .. } | E::NotPositiveDefinite { .. }) => 1,
            _ => 2,
        }
    }
}
