//! Convergence studies: solve a manufactured problem on a sequence of
//! uniform meshes and tabulate errors, observed orders and Newton
//! iteration counts.

mod emit;
mod study;

pub use emit::{emit, plot_data, to_csv, to_json, to_markdown, Format};
pub use study::{
    observed_order, run_study, solve_level, LevelResult, StudyConfig, StudyFailure, StudyMetadata,
    StudyReport, StudyRow,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("solver: {0}")]
    Solver(#[from] sdg::SdgError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
