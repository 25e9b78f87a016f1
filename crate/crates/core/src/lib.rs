//! Labeled citation field extraction data from BibTeX sources.
//!
//! The crate covers the full pipeline:
//!
//! - [`bibtex`] parses `.bib` text into normalized [`bibtex::BibEntry`] records,
//!   expanding `@string` macros and splitting author lists with the BibTeX name grammar.
//! - [`style`] renders entries under declarative bibliography styles, producing a plain
//!   reference string alongside a marked copy where each field value is wrapped in
//!   private-use sentinels. It also picks a small covering subset of styles.
//! - [`labeling`] turns rendered strings into BIO-tagged token sequences, either from the
//!   sentinels or by fuzzy matching known field values, and can simulate text-extraction noise.
//! - [`dataset`] drives parallel, seed-deterministic generation, source-disjoint splits,
//!   corpus statistics and audit exports.
//! - [`crf`] is a linear-chain CRF tagger with sparse features, exact inference and Adam training.
//! - [`eval`] computes exact-boundary span precision/recall/F1.
//! - [`cli`] wires everything into the `citeforge` executable.

pub mod bibtex;
pub mod cli;
pub mod crf;
pub mod dataset;
pub mod eval;
pub mod labeling;
pub mod style;
