// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A specification or configuration value is out of its domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The filter sums to zero within the truncation tolerance.
    #[error("degenerate filter: |A_psi| = {a_psi:e} is not above the tolerance {tol:e}")]
    DegenerateFilter { a_psi: f64, tol: f64 },

    #[error("exhaustive search limited to {max} interior points, got {interior}")]
    OracleSize { interior: usize, max: usize },

    #[error("unsupported exponent p = {p}: {requirement}")]
    UnsupportedExponent { p: f64, requirement: &'static str },

    #[error("empty series")]
    EmptySeries,

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    /// The q-variation of this function family has no closed form here.
    #[error("q-variation norm not available: {0}")]
    UnsupportedNorm(String),

    #[error("degenerate design: sum of f(j/n)^2 is zero")]
    DegenerateDesign,

    #[error("degenerate partition: segment {segment} contains no grid point")]
    DegeneratePartition { segment: usize },

    #[error("critical value table was built for p = {table_p}, test requested p = {p}")]
    TableMismatch { table_p: f64, p: f64 },

    #[error("critical value table has neither level {level} nor a stored sample")]
    LevelMissing { level: f64 },

    #[error("normalizing scale sigma_eta * |A_psi| must be positive, got {0}")]
    ZeroScale(f64),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
