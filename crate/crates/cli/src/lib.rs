//! Config ingestion, command dispatch and report emission for the `ftnm`
//! binary.
//!
//! A run is a [`RunConfig`] (command, parameter tree, seed, output format)
//! turned into a [`Report`] by [`execute`]. Reports carry no timestamps, so a
//! fixed config and seed always render to the same bytes.

pub mod commands;
pub mod config;
pub mod report;
pub mod schema;

use std::fs;

pub use config::{CliError, Command, Format, Params, RunConfig};
pub use report::{Record, Report, Verdict};

/// Exit status for a run whose verdicts all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status when a bound check failed.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for bad invocations and unreadable inputs.
pub const EXIT_CONFIG: i32 = 2;

pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut rep = Report::new(config.command.name(), config.seed, config.parameters.clone());
    use Command::*;
    let run = match config.command {
        SpectralWidth => commands::spectral_width_cmd,
        Fidelity => commands::fidelity_cmd,
        VerifyBounds => commands::verify_bounds_cmd,
        SpreadIdentity => commands::spread_identity_cmd,
        SparseCheck => commands::sparse_check_cmd,
        Propagate => commands::propagate_cmd,
        Threshold => commands::threshold_cmd,
        Recursion => commands::recursion_cmd,
        Level => commands::level_cmd,
        Spinboson => commands::spinboson_cmd,
        Hyperfine => commands::hyperfine_cmd,
    };
    run(config, &mut rep)?;
    Ok(rep)
}

/// Writes the rendered report to `config.output_path`, or returns it for
/// the caller to print.
pub fn emit(report: &Report, config: &RunConfig) -> Result<Option<Vec<u8>>, CliError> {
    let bytes = report.render(config.format);
    match &config.output_path {
        Some(path) => {
            fs::write(path, &bytes).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            Ok(None)
        }
        None => Ok(Some(bytes)),
    }
}
