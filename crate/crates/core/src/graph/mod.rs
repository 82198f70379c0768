//! Property-graph store for knowledge networks.
//!
//! A [`KnowledgeGraph`] holds typed nodes (persons, indicators, organizations,
//! countries) and typed, optionally dated edges between them. Every successful
//! mutation bumps the graph's version. [`GraphStore`] wraps a graph for
//! concurrent use: one writer at a time, readers on immutable snapshots.

mod model;
mod persist;
mod store;

pub use model::{Edge, EdgeKind, GraphError, KnowledgeGraph, Node, NodeId, NodeKind};
pub use persist::{ingest_lines, load, parse_record, save, IngestReport, LineError, PersistError, Record};
pub use store::GraphStore;
