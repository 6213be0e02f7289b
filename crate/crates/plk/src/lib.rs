//! Command-line driver for `plk-core`: JSON interchange, certificates, reports
//! and CSV plot series.

pub mod commands;
pub mod dto;
pub mod error;
pub mod io;
pub mod plot;
pub mod report;

pub use commands::{run, Cli, Command};
pub use error::{CliError, Exit};
pub use report::{RunReport, Status};

/// Caps the rayon pool at `PLK_THREADS` workers when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("PLK_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("PLK_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::Usage("PLK_THREADS must be positive".into()));
    }
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
