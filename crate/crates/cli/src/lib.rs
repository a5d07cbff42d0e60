//! Command-line front end for the `primelab` experiments.

pub mod args;
pub mod experiment;
pub mod render;

use std::path::Path;

pub use experiment::{ExecOptions, Experiment, Report, Results};
pub use render::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

/// Exit status for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use primelab::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Capacity { .. }) => EXIT_CAPACITY,
        Some(Error::Hypothesis(_) | Error::Degenerate(_)) => EXIT_HYPOTHESIS,
        Some(_) => EXIT_USAGE,
        None => EXIT_IO,
    }
}

/// Runs `experiment`, on a pool of `options.threads` workers when given.
pub fn execute(experiment: &Experiment, options: &ExecOptions) -> anyhow::Result<Report> {
    Ok(with_threads(options.threads, || experiment.run(options))??)
}

/// Runs `f` on a dedicated pool when a thread budget is given.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    match threads {
        Some(0) => anyhow::bail!(primelab::Error::InvalidArgument(
            "--threads must be positive".into()
        )),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    if threads == Some(0) {
        anyhow::bail!(primelab::Error::InvalidArgument(
            "--threads must be positive".into()
        ));
    }
    Ok(f())
}

/// Recovers the configuration echoed in a JSON report.
pub fn config_from_json(text: &str) -> anyhow::Result<Experiment> {
    #[derive(serde::Deserialize)]
    struct Echo {
        config: Experiment,
    }
    Ok(serde_json::from_str::<Echo>(text)?.config)
}

pub fn write_output(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    use std::io::Write;
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
