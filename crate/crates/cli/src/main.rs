use clap::Parser;

fn main() {
    let cli = rdwd_cli::Cli::parse();
    if let Err(e) = rdwd_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
