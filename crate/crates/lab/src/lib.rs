//! Configuration, parameter-space sweeps, persistence and figure emission
//! on top of `circle-core`.

pub mod config;
pub mod error;
pub mod expr;
pub mod figures;
pub mod formats;
pub mod sweep;

pub use error::LabError;
