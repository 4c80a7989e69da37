//! Command-line laboratory around `kpp-core`: experiment orchestration,
//! CSV/JSON/SVG emission, and the acceptance-suite runner.
//!
//! Every run writes into a fresh `run-NNN-<command>/` directory under the
//! output root (append-only; prior outputs are never mutated) together
//! with a manifest echoing the configuration, artifact versions, and wall
//! time. `KPP_THREADS` caps the worker pool.

pub mod accept;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod svg;

pub use cli::run;
