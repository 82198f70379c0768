//! HTTP API over the graph store, matcher, classifier and synthesizer.
//!
//! Every request needs `Authorization: Bearer <token>`. Graph writes go
//! through the single-writer store; queries and classification read
//! snapshots.

mod config;
mod routes;
mod state;

pub use config::{ConfigError, ServiceConfig};
pub use routes::{router, ApiError, BODY_LIMIT, MAX_GENERATE};
pub use state::{AppState, JobStatus, QueryJob, Shared, CLASSIFIER_FILE};

use tokio::net::TcpListener;

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let listen = config.listen;
    let state = AppState::open(config)?;
    let listener = TcpListener::bind(listen).await?;
    log::info!("listening on {}", listener.local_addr()?);
    run(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
