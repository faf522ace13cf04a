//! Occupational exposome networks built from occupational health problem reports.

pub mod cli;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod stats;
pub mod surveillance;
pub mod synth;
pub mod tripartite;
