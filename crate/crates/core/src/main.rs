use clap::Parser;

use chebdyn::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("chebdyn {}: {e}", cli.command.name());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
