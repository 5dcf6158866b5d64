use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use sketchlayout_service::{router, ServerConfig};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "sketchlayout-server", version, about = "Serve the sketch layout API and front end")]
struct Args {
    #[arg(long, env = "SKETCHLAYOUT_PORT", default_value_t = 8080)]
    port: u16,

    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,

    /// Built front-end files served for non-API paths.
    #[arg(long)]
    static_dir: Option<PathBuf>,

    /// Enable permissive CORS for a separately served front end.
    #[arg(long)]
    dev: bool,
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            tracing::warn!("static directory {} does not exist", dir.display());
        }
    }
    let app = router(&ServerConfig { static_dir: args.static_dir.clone(), dev: args.dev });

    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    tracing::info!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .context("server error")
}
