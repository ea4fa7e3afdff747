use clap::Parser;

fn main() {
    let cli = colorenz::cli::Cli::parse();
    if let Err(e) = colorenz::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
