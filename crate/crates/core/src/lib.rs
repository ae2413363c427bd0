//! Variable-speed random walks among time-dependent random conductances on Z^d.
//!
//! The crate is organized as a pipeline:
//!
//! * [`env`]: conductance fields (constant, static iid, Poisson-renewal, layered)
//!   with exact space-time shifts and time reversal,
//! * [`lattice`]: finite Euclidean balls of Z^d with dense indexing,
//! * [`kernel`]: killed heat kernels by exact piecewise uniformization, plus
//!   Green-function readouts with boundary recapture,
//! * [`sampler`]: trajectory simulation by exact hazard inversion,
//! * [`estimators`]: entropy, delta distance, discrete derivatives, the k_alpha
//!   profile, and the annealed Monte-Carlo combinator,
//! * [`verify`]: statistical checks turning the decay/limit statements into
//!   pass/fail reports with fitted exponents.
//!
//! Everything is deterministic given seeds; parallelism never changes results.

pub mod env;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod lattice;
pub mod point;
pub mod sampler;
pub mod verify;

pub use env::{EnvironmentField, FieldModel, MarginalLaw};
pub use error::CoreError;
pub use estimators::{DiscreteMeasure, GaussianKernel, KernelTable, MonteCarloEstimate};
pub use kernel::{EvolveTolerance, GeneratorMatrix, GreenReadout, KernelSlice, SliceDirection};
pub use lattice::LatticeBox;
pub use point::{Edge, Vertex, MAX_DIM};
pub use sampler::TrajectorySample;
pub use verify::{CheckReport, PowerLawFit};

pub type Result<T> = std::result::Result<T, CoreError>;
