//! Building blocks for gold-standard author name disambiguation (AND) datasets.
//!
//! The pipeline links an author registry (persistent author IDs with a
//! credible full name and claimed DOIs) to a citation corpus, locates each
//! claimed author inside the citation's byline, groups the linked claims into
//! name blocks, samples same-author pairs, and benchmarks disambiguation
//! methods on the result.
//!
//! Modules map onto pipeline stages:
//!
//! - [`ingest`]: line-delimited JSON readers and writers for the two corpora
//! - [`namekit`]: name normalization, 2-gram similarity, transliteration, parsing
//! - [`linker`]: DOI join and author position identification
//! - [`builder`]: block dataset, pairwise sampling, trimming, splits
//! - [`profiler`]: distribution reports used to validate a built dataset
//! - [`disambig`]: pair features and a random forest classifier
//! - [`cluster`]: agglomerative clustering and threshold tuning
//! - [`metrics`]: classification and B-cubed scores, external ID audits
//! - [`synth`]: synthetic corpora with known ground truth

pub mod builder;
pub mod cluster;
pub mod disambig;
mod error;
pub mod ingest;
pub mod linker;
pub mod metrics;
pub mod namekit;
pub mod profiler;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};

/// Version of the on-disk dataset, model and report formats.
pub const FORMAT_VERSION: u32 = 1;
