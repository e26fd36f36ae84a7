//! Scenario runner, catalog listing, acceptance matrix and file output.

pub mod acceptance;
pub mod catalog;
pub mod config;
pub mod scenario;
pub mod suites;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use acceptance::{run_acceptance, AcceptanceReport, Criterion};
pub use catalog::list_catalog;
pub use config::{CatalogEntry, CheckKind, GridSpec, RunSpec, ScenarioConfig};
pub use scenario::{run_scenario, CheckOutcome, RunReport, ScenarioRun, Timing};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG_INVALID: i32 = 2;
    pub const IO_ERROR: i32 = 3;
}

/// Exit code for an error that aborted a run before reports were complete.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::IO_ERROR,
        Error::ConfigInvalid(_) | Error::UnknownId(_) | Error::ParamOutOfRange(_) | Error::InvalidTolerance(_) => {
            exit::CONFIG_INVALID
        }
        _ => exit::CHECK_FAILED,
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with shortest round-trip floats and a trailing newline.
pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}
