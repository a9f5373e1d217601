//! HTTP API over the store, feedback providers and recommenders.

pub mod api;
pub mod config;
mod error;

use tokio::net::TcpListener;

pub use api::{router, AppState};
pub use config::{Config, ConfigError};
pub use error::ApiError;

/// Opens the store, loads models and binds the listener.
pub async fn bind(config: &Config) -> Result<(TcpListener, AppState), Box<dyn std::error::Error>> {
    let models = config.load_models()?;
    let store = alter_store::Store::open(&config.store)?;
    let state = AppState::new(store, models, config.providers.clone(), config.k);
    let listener = TcpListener::bind(&config.listen).await?;
    Ok((listener, state))
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
