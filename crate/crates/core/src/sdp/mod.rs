//! Standard-form real semidefinite programs: data model, validation, SDPA
//! interchange and the interior-point backend.

pub(crate) mod model;
mod sdpa;
mod solver;

pub use model::{BlockValue, Entry, Finding, RealSDP};
pub use sdpa::{export_sdpa, import_sdpa, import_sdpa_file, read_sdpa, write_sdpa};
pub use solver::{
    backend_from_env, solve, solve_with, InteriorPoint, Residuals, SdpBackend, Solution, SolverOptions,
    Status, DEFAULT_TOL,
};
