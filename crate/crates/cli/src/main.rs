use clap::Parser;
use nonlin_mdp_cli::{run, RunConfig, EXIT_FAILURE};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_FAILURE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            println!("{} (results in {})", outcome.summary, outcome.out_dir.display());
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
