//! Batch verification driver. Every suite is a subcommand with a JSON
//! config, a deterministic seed, and a byte-stable machine-readable report;
//! failed checks carry witnesses that can be replayed individually.

pub mod catalog;
pub mod config;
pub mod homfile;
pub mod numeric_text;
pub mod report;
pub mod suites;
