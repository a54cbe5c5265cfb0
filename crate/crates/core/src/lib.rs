//! Mean-time-to-data-loss analysis for erasure-coded disk groups whose
//! failure rates depend on how many disks have already failed.
//!
//! The failure chain of one protection group is described by a
//! [`FailureModel`]; [`markov`] evaluates it by closed form, linear solve,
//! parity recursion and a computable upper bound, and [`montecarlo`]
//! simulates it independently.

pub mod allocation;
pub mod error;
pub mod growth;
pub mod hard_error;
pub mod markov;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod overhead;
pub mod solver;

pub use error::{Error, Result};
pub use growth::{GrowthSpec, RepairMode, RepairSpec};
pub use model::{FailureModel, InitialDistribution, Method, MttdlEstimate};
pub use montecarlo::{SimConfig, SimResult};
