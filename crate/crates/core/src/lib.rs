//! Learning and evaluating grammatical-relation finders over chunked text.
//!
//! Two learners are provided over the same candidate representation: a
//! memory-based learner ([`mbl`], IB1 and IGTREE) and a transformation-based
//! error-driven rule learner ([`tbl`]). Around them sit the corpus format,
//! candidate search spaces and feature windows, data partitioning, a
//! hand-written rule baseline, scoring with randomization significance
//! tests, a synthetic corpus generator, and an experiment runner.

pub mod baseline;
pub mod candidates;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod mbl;
pub mod partition;
pub mod synth;
pub mod system;
pub mod tbl;

pub use error::{Error, Result};

/// Version string recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
