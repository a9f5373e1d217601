use std::path::PathBuf;
use std::process::ExitCode;

use alter_service::{bind, serve, Config};
use clap::Parser;

/// Serve the rewriting API.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Configuration file (key = value lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match Config::from_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("alter-server: {e}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    config.apply_env();
    let (listener, state) = match bind(&config).await {
        Ok(v) => v,
        Err(e) => {
            eprintln!("alter-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    match listener.local_addr() {
        Ok(addr) => eprintln!(
            "alter-server: listening on http://{addr}, store {}",
            config.store.display()
        ),
        Err(e) => eprintln!("alter-server: {e}"),
    }
    if let Err(e) = serve(listener, state).await {
        eprintln!("alter-server: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
