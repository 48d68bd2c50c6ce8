//! Scans over composite keys laid out on generalized z-curves: pattern
//! matchers with Match, Mismatch and Hint, locus analytics, ordered stores,
//! and crawler, frog and grasshopper scan strategies.

pub mod bitkey;
pub mod engine;
mod error;
pub mod layout;
pub mod locus;
pub mod matcher;
pub mod store;

pub use bitkey::{BitKey, Mask};
pub use engine::{run_partitioned, run_scan, ScanOptions, ScanReport, Strategy};
pub use error::{Error, Result};
pub use layout::{build_layout, Dimension, Layout, LayoutStrategy};
pub use matcher::{Filter, FilterKind, Hint, Matcher};
