//! A service instance on an ephemeral port, seeded from fixture files.

use std::path::PathBuf;

use inspect_core::nlp::CorpusRecord;
use inspect_core::service::{run, AppState, ServiceConfig};
use rand::SeedableRng;
use reqwest::{Client, Response};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

pub const TOKEN: &str = "test-token";

pub struct Live {
    pub base: String,
    pub dir: tempfile::TempDir,
    pub config: ServiceConfig,
    pub client: Client,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<()>>,
}

/// Corpus of `corpus_size` separable snippets, the scenario graph, the
/// gazetteer and 200 toy trajectories.
pub async fn start(corpus_size: usize) -> Live {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| -> PathBuf { dir.path().join(n) };
    std::fs::copy(super::fixture("fig3.jsonl"), path("graph.jsonl")).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let corpus = super::separable_corpus(&mut rng, 15, 40);
    let mut lines = String::new();
    for s in corpus.iter().take(corpus_size) {
        let r = CorpusRecord { text: s.text.clone(), labels: s.labels.iter().cloned().collect(), feedback: None };
        lines += &serde_json::to_string(&r).unwrap();
        lines.push('\n');
    }
    std::fs::write(path("corpus.jsonl"), lines).unwrap();
    let mut traj = Vec::new();
    inspect_core::synth::write_trajectories(&mut traj, &super::toy_trajectories(200, 4)).unwrap();
    std::fs::write(path("trajectories.jsonl"), traj).unwrap();
    let config = ServiceConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        token: TOKEN.into(),
        graph: path("graph.jsonl"),
        taxonomy: None,
        gazetteer: Some(super::fixture("gazetteer.json")),
        corpus: path("corpus.jsonl"),
        model_dir: path("models"),
        trajectories: Some(path("trajectories.jsonl")),
        default_threshold: 0.7,
    };
    let listener = TcpListener::bind(config.listen).await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let state = AppState::open(config.clone()).unwrap();
    let (tx, rx) = oneshot::channel();
    let task = tokio::spawn(async move {
        run(listener, state, async {
            let _ = rx.await;
        })
        .await
        .unwrap();
    });
    Live { base, dir, config, client: Client::new(), stop: Some(tx), task: Some(task) }
}

impl Live {
    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn post(&self, path: &str, body: impl Into<reqwest::Body>) -> Response {
        self.client.post(self.url(path)).bearer_auth(TOKEN).body(body).send().await.unwrap()
    }

    pub async fn post_json(&self, path: &str, body: &serde_json::Value) -> Response {
        self.client.post(self.url(path)).bearer_auth(TOKEN).json(body).send().await.unwrap()
    }

    pub async fn get(&self, path: &str) -> Response {
        self.client.get(self.url(path)).bearer_auth(TOKEN).send().await.unwrap()
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.task.take() {
            t.await.unwrap();
        }
    }
}
