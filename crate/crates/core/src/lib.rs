//! Auditing toolkit for `unsafe` usage in Go projects.
//!
//! - [`frontend`] parses Go sources into positioned syntax trees.
//! - [`census`] finds and classifies every unsafe-related token.
//! - [`modgraph`] resolves modules and builds the deduplicated dependency DAG.
//! - [`lints`] runs the slice-header and struct-cast passes.
//! - [`report`] renders CSV, JSON and tree output and corpus statistics.
//! - [`cli`] wires everything into the `unsafe-audit` executable.

pub mod census;
pub mod cli;
pub mod frontend;
pub mod lints;
pub mod modgraph;
pub mod report;
