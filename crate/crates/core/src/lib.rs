//! Investigative pattern detection over behavioral-indicator knowledge networks.
//!
//! The crate is organised by subsystem:
//!
//! - [`graph`]: property-graph store for persons, indicators, organizations and
//!   countries, with snapshot reads and line-oriented persistence.
//! - [`dsl`]: the text query-graph language analysts author searches in.
//! - [`matcher`]: inexact individual / neighborhood similarity scoring and ranking,
//!   plus a brute-force oracle used for verification.
//! - [`nlp`]: indicator text classification, stratified cross-validation and
//!   gazetteer entity extraction.
//! - [`synth`]: CDF feature mapping and an adversarial autoencoder that generates
//!   synthetic behavioral trajectories.
//! - [`service`]: the HTTP service wiring everything together.

pub mod cli;
pub mod day;
pub mod dsl;
pub mod graph;
pub mod matcher;
pub mod nlp;
pub mod service;
pub mod synth;
pub mod taxonomy;

pub use day::Day;
pub use taxonomy::IndicatorTaxonomy;
