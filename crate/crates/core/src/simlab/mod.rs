//! Dirichlet simulations comparing the sphere classifier with the linear
//! baselines.

mod dirichlet;
mod run;
mod scenario;
mod table;

use thiserror::Error;

use crate::data::DataError;

pub use dirichlet::{sample_dirichlet, DirichletParams, DirichletSampler};
pub use run::{
    evaluate_draw, replication_rng, run_scenario, run_scenario_with_threads, simulation_one,
    thread_cap, Counts, DrawSpec, SimulationOne, THREADS_ENV,
};
pub use scenario::{ExperimentScenario, Method, TestClass, FULL_DIMS};
pub use table::{ErrorRow, ErrorTable, MeanSd, Rates, ERROR_TABLE_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimlabError {
    #[error("invalid Dirichlet parameter: {0}")]
    InvalidAlpha(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Data(#[from] DataError),
}
