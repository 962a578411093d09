use clap::Parser;

fn main() {
    let cli = nls_harness::cli::Cli::parse();
    if let Err(err) = nls_harness::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
