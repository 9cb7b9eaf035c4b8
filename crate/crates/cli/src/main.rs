use clap::Parser;
use funtf_cli::commands::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(outcome) => println!("{}", outcome.stdout),
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_code(&result));
}
