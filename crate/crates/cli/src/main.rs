use clap::Parser;
use wgauss_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(line) => println!("{line}"),
        Err(e) => {
            eprintln!("{}", e.line());
            std::process::exit(e.code());
        }
    }
}
