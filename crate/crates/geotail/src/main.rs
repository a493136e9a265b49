use clap::Parser;
use geotail::cli::{self, Cli};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors; everything else is an input error
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let config: cli::RunConfig = cli.into();
    let output_path = config.output_path.clone();
    let outcome = cli::run(config);
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    if !outcome.body.is_empty() {
        let written = match &output_path {
            Some(path) => std::fs::write(path, outcome.body.as_bytes()),
            None => std::io::stdout().write_all(outcome.body.as_bytes()).map(|_| {
                println!();
            }),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
