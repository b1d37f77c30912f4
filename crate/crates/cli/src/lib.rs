//! Experiment runner: configuration, single solves, convergence studies and
//! field export.

pub mod config;
pub mod export;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Solver {
        stage: String,
        #[source]
        source: rte_pml::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<rte_pml::Error> for CliError {
    fn from(source: rte_pml::Error) -> Self {
        CliError::Solver { stage: "setup".into(), source }
    }
}

impl CliError {
    pub fn at(stage: impl Into<String>) -> impl FnOnce(rte_pml::Error) -> CliError {
        let stage = stage.into();
        move |source| CliError::Solver { stage, source }
    }

    /// 0 success, 2 configuration error, 3 convergence failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { source: rte_pml::Error::Convergence { .. } | rte_pml::Error::Breakdown(_), .. } => 3,
            CliError::Solver { source: rte_pml::Error::UnsupportedOrder(_), .. } => 2,
            _ => 1,
        }
    }
}

pub use config::RunConfig;
pub use run::{convergence_study, run_case, solve_all, StudyRow};
