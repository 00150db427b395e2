use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(name = "elastibez-service", version, about = "JSON API for λ-residual, projection and elastica fitting")]
struct Args {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let addr = format!("{}:{}", args.host, args.port);
    let listener = match tokio::net::TcpListener::bind(&addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            return ExitCode::from(1);
        }
    };
    eprintln!("listening on http://{addr}");
    if let Err(e) = axum::serve(listener, elastibez_service::app()).await {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
