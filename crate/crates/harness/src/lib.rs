//! Experiment harness around the solver core: flat dotted-key
//! configuration, the `nlsim` command-line interface, sweep
//! orchestration over a worker pool, and deterministic CSV/JSON
//! artifacts.
//!
//! The crate is a library plus a thin binary so integration tests and
//! the acceptance suite can drive the same code paths in process that
//! the CLI exposes. Determinism is a design constraint throughout:
//! identical config and seed must reproduce every artifact byte for
//! byte, so manifests carry no timestamps, no absolute paths, and no
//! environment echoes.

pub mod artifacts;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

pub use config::{Config, InitialDatum, Preset, RunConfig};
pub use error::{HarnessError, Result};
