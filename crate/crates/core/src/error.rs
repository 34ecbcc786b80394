use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::benchmarks::BenchmarkError;
use crate::mesh::MeshError;
use crate::postproc::PostprocError;
use crate::solver::SolverError;
use crate::voigt::VoigtError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Voigt(#[from] VoigtError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Postproc(#[from] PostprocError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error("{0}")]
    Config(String),
}
