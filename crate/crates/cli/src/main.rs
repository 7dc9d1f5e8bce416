use clap::Parser;
use symext_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    let code = match symext_cli::commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}
