use std::process::ExitCode;

use anyhow::anyhow;
use clap::Parser;
use latentkit::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.error.exit_code();
            let mut err = anyhow::Error::new(f.error);
            if let Some(stage) = &f.stage {
                err = err.context(format!("stage `{stage}` failed"));
            }
            if let Some(out) = &f.out {
                err = err.context(anyhow!("details in {}", out.join("error.json").display()));
            }
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
