// SPDX-License-Identifier: MIT OR Apache-2.0

//! Weighted sums and p-variation of short-memory linear processes.
//!
//! * [`filters`]: linear-process specification and simulation.
//! * [`pvar`]: exact p-variation of finite paths with witness partitions.
//! * [`funcspace`]: step and smooth weight functions, q-variation norms.
//! * [`limits`]: Monte Carlo limit laws and critical-value tables.
//! * [`regress`]: least-squares regression on a weight function.
//! * [`changepoint`]: the `T_n` multiple change-point test.

pub mod changepoint;
pub mod error;
pub mod filters;
pub mod funcspace;
pub mod limits;
pub mod pvar;
pub mod regress;
pub mod rng;

pub use error::{Error, Result};
pub use filters::{FilterSpec, Innovation, InnovationSpec, Origin, Series};
pub use funcspace::{StepFunction, WeightFunction};
pub use limits::{CriticalValueTable, EmpiricalSample};
pub use pvar::PvarResult;

/// Library version, reported alongside [`rng::GENERATOR`].
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
