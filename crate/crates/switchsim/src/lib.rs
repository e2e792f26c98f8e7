//! File formats and sweeps behind the `switchsim` command line.
//!
//! - [`config`]: the JSON run configuration, with Haar-random filling of
//!   missing gates from a seed.
//! - [`graph_io`]: circuit graphs as JSON or a small DOT subset.
//! - [`report`]: JSON and CSV renderings of tables, Friend reports and
//!   event maps.
//! - [`sweep`]: seeded random-configuration sweeps checked against the
//!   closed form and the oracle.
//!
//! Randomness always comes from `ChaCha8Rng` seeded with a single `u64`, so
//! every output is reproducible across platforms.

// `!(x <= tol)` also rejects NaN, which `x > tol` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod graph_io;
pub mod report;
pub mod sweep;

pub use error::CliError;

use switchsim_core::TAU_AGG;

/// Environment variable that overrides the aggregate tolerance.
pub const TOL_ENV: &str = "SWITCHSIM_TOL";

/// Parses an override for `τ_agg`; `None` keeps the default.
pub fn tolerance_from(value: Option<&str>) -> Result<f64, CliError> {
    let Some(raw) = value else { return Ok(TAU_AGG) };
    match raw.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(CliError::Parse(format!("{TOL_ENV} must be a positive decimal, got `{raw}`"))),
    }
}

/// `τ_agg`, honouring [`TOL_ENV`].
pub fn tolerance() -> Result<f64, CliError> {
    tolerance_from(std::env::var(TOL_ENV).ok().as_deref())
}
