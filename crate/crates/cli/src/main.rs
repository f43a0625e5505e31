use clap::Parser;

fn main() {
    let cli = dnls_cli::Cli::parse();
    if let Err(e) = dnls_cli::run(cli) {
        eprintln!("dnls: {e}");
        std::process::exit(e.exit_code());
    }
}
