use clap::Parser;

fn main() {
    let cli = shubin::cli::Cli::parse();
    if let Err(e) = shubin::cli::configure_threads() {
        eprintln!("error [{}]: {e}", e.code());
        std::process::exit(shubin::cli::EXIT_VALIDATION);
    }
    std::process::exit(shubin::cli::run(&cli));
}
