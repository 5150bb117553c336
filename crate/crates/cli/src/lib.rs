//! Library backing the `cocycle-lab` binary: argument types, command
//! implementations, and the acceptance suite run by `cocycle-lab repro`.
//!
//! Every command renders a full report (JSON, or CSV for sweeps) that echoes
//! its resolved configuration. Reports are byte-identical across runs and
//! worker counts; the worker count is deliberately not part of the echoed
//! config.

pub mod accept;
pub mod args;
pub mod commands;
pub mod output;
