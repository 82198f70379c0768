use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use super::model::KnowledgeGraph;

/// Single-writer, multi-reader holder of a [`KnowledgeGraph`].
///
/// Readers take an immutable [`snapshot`](GraphStore::snapshot) that never
/// changes underneath them. Writers are serialized; each [`update`](GraphStore::update)
/// mutates a private copy and publishes it atomically when done.
#[derive(Debug)]
pub struct GraphStore {
    current: RwLock<Arc<KnowledgeGraph>>,
    writer: Mutex<()>,
}

impl GraphStore {
    pub fn new(graph: KnowledgeGraph) -> Self {
        GraphStore { current: RwLock::new(Arc::new(graph)), writer: Mutex::new(()) }
    }

    pub fn snapshot(&self) -> Arc<KnowledgeGraph> {
        Arc::clone(&self.current.read())
    }

    pub fn version(&self) -> u64 {
        self.current.read().version()
    }

    /// Runs `f` against a copy of the current graph and publishes the result.
    pub fn update<R>(&self, f: impl FnOnce(&mut KnowledgeGraph) -> R) -> R {
        let _guard = self.writer.lock();
        let mut working = (*self.snapshot()).clone();
        let out = f(&mut working);
        *self.current.write() = Arc::new(working);
        out
    }
}
