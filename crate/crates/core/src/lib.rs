//! Benchmark harness for RDF bulk loading.
//!
//! The crate bundles everything needed to measure how fast RDF datasets
//! load into a triple store and to compare datasets against each other:
//!
//! - [`ntriples`]: streaming N-Triples parser and canonical serializer;
//! - [`dataset`]: batch splitting, dataset statistics, and a synthetic
//!   generator with controllable structural regularity;
//! - [`store`]: the store abstraction under test, an embedded reference
//!   store with SPO/POS/OSP indexes, and misbehaving test adapters;
//! - [`driver`]: sequential batch loading with timing, resource
//!   sampling, and abort rules (store crash, speed below threshold);
//! - [`analysis`]: mean and relative loading speed, trimming and
//!   exclusion, windowed aggregation, and summary reports.
//!
//! The `rdfload` binary exposes these as `split`, `stats`, `synth`,
//! `bench`, `analyze`, and `report` subcommands.

pub mod analysis;
pub mod dataset;
pub mod driver;
pub mod error;
pub mod model;
pub mod ntriples;
pub mod store;

pub use error::Error;
