//! Command line front end: datasets, filter text, queries, benchmarks and
//! analysis reports.

pub mod analyze;
pub mod bench;
pub mod cli;
pub mod dataset;
pub mod dsl;
pub mod generate;
pub mod ingest;
pub mod runner;
