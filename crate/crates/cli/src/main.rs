use std::process::ExitCode;

use clap::Parser;
use primelab::golden;
use primelab_cli::args::Cli;
use primelab_cli::{execute, exit_code, render, write_output};

fn run(cli: &Cli) -> anyhow::Result<()> {
    let options = cli.output.exec_options();
    match cli.command.experiment()? {
        Some(experiment) => {
            let report = execute(&experiment, &options)?;
            let text = render::render(&report, cli.output.format)?;
            write_output(&text, cli.output.output.as_deref())
        }
        None => {
            let data = primelab_cli::with_threads(options.threads, golden::compute)??;
            let mut text = serde_json::to_string_pretty(&data)?;
            text.push('\n');
            let path = cli
                .output
                .output
                .clone()
                .unwrap_or_else(|| golden::GOLDEN_PATH.into());
            write_output(&text, Some(&path))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
