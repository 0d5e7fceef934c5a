mod args;
mod commands;
mod exit;
mod output;
mod settings;
mod solve;

use clap::Parser;

fn main() {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let status = settings::Settings::resolve(&cli.common).and_then(|s| commands::run(&cli.command, &s));
    match status {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit::code_for(&e));
        }
    }
}
