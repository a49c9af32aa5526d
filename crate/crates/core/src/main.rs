use clap::Parser;

fn main() {
    let cli = multipoly::cli::Cli::parse();
    if let Err(e) = multipoly::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
