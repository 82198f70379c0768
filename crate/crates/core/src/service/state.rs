use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use anyhow::Context;
use parking_lot::{Mutex, RwLock};
use serde::Serialize;

use super::config::ServiceConfig;
use crate::graph::{self, GraphStore, KnowledgeGraph};
use crate::matcher::RankedResults;
use crate::nlp::{Gazetteer, IndicatorModel};
use crate::synth::AaeModel;
use crate::taxonomy::IndicatorTaxonomy;

pub const CLASSIFIER_FILE: &str = "classifier.json";
const SYNTH_PREFIX: &str = "aae-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JobStatus {
    Done,
    Failed,
}

/// A submitted query with its full (threshold 0) result list.
#[derive(Debug, Clone, Serialize)]
pub struct QueryJob {
    pub id: String,
    pub dsl_text: String,
    pub status: JobStatus,
    pub graph_version: u64,
    #[serde(skip)]
    pub full: Option<RankedResults>,
    pub error: Option<String>,
}

/// Everything a handler can reach through [`AppState`].
pub struct Shared {
    pub config: ServiceConfig,
    pub taxonomy: Arc<IndicatorTaxonomy>,
    pub gazetteer: Gazetteer,
    pub store: GraphStore,
    /// Held across an ingest and the file write that follows it.
    pub graph_file: Mutex<()>,
    pub classifier: RwLock<Option<Arc<IndicatorModel>>>,
    pub queries: RwLock<HashMap<String, Arc<QueryJob>>>,
    pub synth: Mutex<HashMap<String, Arc<AaeModel>>>,
    pub corpus_file: Mutex<()>,
    next_query: AtomicU64,
    next_model: AtomicU64,
}

/// Shared handle passed to every request handler.
#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl std::ops::Deref for AppState {
    type Target = Shared;
    fn deref(&self) -> &Shared {
        &self.0
    }
}

impl AppState {
    /// Loads taxonomy, gazetteer, graph and any saved classifier. Missing
    /// graph and corpus files are treated as empty; the model directory is
    /// created.
    pub fn open(config: ServiceConfig) -> anyhow::Result<Self> {
        let taxonomy = match &config.taxonomy {
            Some(p) => IndicatorTaxonomy::load(p).with_context(|| format!("taxonomy {}", p.display()))?,
            None => IndicatorTaxonomy::default_placeholder(),
        };
        let gazetteer = match &config.gazetteer {
            Some(p) => Gazetteer::load(p).with_context(|| format!("gazetteer {}", p.display()))?,
            None => Gazetteer::default(),
        };
        let graph = if config.graph.exists() {
            let f = File::open(&config.graph).with_context(|| format!("graph {}", config.graph.display()))?;
            graph::load(BufReader::new(f), taxonomy.clone())
                .with_context(|| format!("graph {}", config.graph.display()))?
        } else {
            KnowledgeGraph::new(taxonomy.clone())
        };
        std::fs::create_dir_all(&config.model_dir)
            .with_context(|| format!("model dir {}", config.model_dir.display()))?;
        let classifier_path = config.model_dir.join(CLASSIFIER_FILE);
        let classifier = if classifier_path.exists() {
            let text = std::fs::read_to_string(&classifier_path)?;
            let model = IndicatorModel::from_json(&text)
                .with_context(|| format!("classifier {}", classifier_path.display()))?;
            log::info!("loaded classifier from {}", classifier_path.display());
            Some(Arc::new(model))
        } else {
            None
        };
        let next_model = next_model_number(&config.model_dir)?;
        log::info!("graph version {} with {} nodes", graph.version(), graph.nodes().count());
        Ok(AppState(Arc::new(Shared {
            taxonomy: graph.shared_taxonomy(),
            store: GraphStore::new(graph),
            graph_file: Mutex::new(()),
            classifier: RwLock::new(classifier),
            queries: RwLock::new(HashMap::new()),
            synth: Mutex::new(HashMap::new()),
            corpus_file: Mutex::new(()),
            next_query: AtomicU64::new(1),
            next_model: AtomicU64::new(next_model),
            gazetteer,
            config,
        })))
    }

    pub(crate) fn new_query_id(&self) -> String {
        format!("q{}", self.next_query.fetch_add(1, Ordering::Relaxed))
    }

    pub(crate) fn new_model_id(&self) -> String {
        format!("{SYNTH_PREFIX}{}", self.next_model.fetch_add(1, Ordering::Relaxed))
    }

    pub(crate) fn model_path(&self, id: &str) -> Option<PathBuf> {
        let n = id.strip_prefix(SYNTH_PREFIX)?;
        (!n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
            .then(|| self.config.model_dir.join(format!("{id}.json")))
    }

    /// In-memory model, else the saved file.
    pub fn synth_model(&self, id: &str) -> anyhow::Result<Option<Arc<AaeModel>>> {
        if let Some(m) = self.synth.lock().get(id) {
            return Ok(Some(m.clone()));
        }
        let Some(path) = self.model_path(id).filter(|p| p.exists()) else {
            return Ok(None);
        };
        let model: AaeModel = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let model = Arc::new(model);
        self.synth.lock().insert(id.to_string(), model.clone());
        Ok(Some(model))
    }
}

fn next_model_number(dir: &Path) -> anyhow::Result<u64> {
    let mut next = 1;
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name();
        let n = name
            .to_str()
            .and_then(|s| s.strip_prefix(SYNTH_PREFIX))
            .and_then(|s| s.strip_suffix(".json"))
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(n) = n {
            next = next.max(n + 1);
        }
    }
    Ok(next)
}

/// Writes via a sibling temp file so readers never see a partial file.
pub(crate) fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
