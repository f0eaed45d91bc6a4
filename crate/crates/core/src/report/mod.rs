//! CSV, JSON and text renderings of findings, trees, diagnostics and corpus
//! statistics.

mod census_csv;
mod diagnostics;
mod stats;
mod taxonomy;
mod tree;

pub use census_csv::{emit_census_csv, parse_census_csv, CENSUS_HEADER};
pub use diagnostics::{emit_diagnostics, DiagnosticFormat};
pub use stats::{
    depth_stats, emit_stats, stats_csv, stats_from_json, CorpusStats, StatsDocument, StatsMetadata,
};
pub use taxonomy::{validate_annotations, Annotation, PurposeClass, WhatClass};
pub use tree::{census_json, render_tree, TreeOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no projects to summarize")]
    EmptyCorpus,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    InvalidRecord { line: u64, message: String },
}
