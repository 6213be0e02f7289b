use std::process::ExitCode;

use clap::Parser;

use plk::io::{to_json, write_json};
use plk::{init_threads, run, Cli, RunReport};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let (report, err) = match init_threads() {
        Ok(()) => run(&cli),
        Err(e) => (RunReport::error(cli.command.verb(), &e), Some(e)),
    };
    let mut code = report.exit(err.as_ref());
    match &cli.report {
        Some(path) => {
            if let Some(e) = err.as_ref() {
                eprintln!("plk: {e}");
            }
            if let Err(e) = write_json(path, &report) {
                eprintln!("plk: {e}");
                code = e.exit();
            }
            println!("{}", report.summary());
        }
        None => {
            if let Some(e) = err.as_ref() {
                eprintln!("plk: {e}");
            }
            print!("{}", to_json(&report));
        }
    }
    code.into()
}
