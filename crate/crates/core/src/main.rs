use clap::Parser;
use inspect_core::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = execute(cli, &mut out) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
