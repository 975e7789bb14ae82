//! Command-line front end of the vortex lab: scenario files and builtins,
//! the `run`, `validate` and `convergence` commands, and exit codes.

pub mod checks;
pub mod convergence;
pub mod error;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use scenario::{Output, Scenario};

/// Sizes the global worker pool. Results do not depend on the count.
pub fn init_workers(workers: Option<usize>) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("'--workers' must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build_global().map_err(|e| CliError::Internal(e.to_string()))
}
