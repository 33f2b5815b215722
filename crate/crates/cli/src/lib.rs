//! Config parsing, experiment drivers and report output for the `emg`
//! command-line tool.

pub mod config;
pub mod experiments;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use config::{build_config, parse_entries, validate_config, ConfigError, Entry, ExperimentConfig, ExperimentKind, Format};
pub use experiments::run_experiment;
pub use table::{Cell, Report};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const ALL_FAILED: i32 = 3;
}

/// Runs the experiment and writes the report to `cfg.out`, or to `stdout`
/// when no output path is set. The summary goes to `stdout` after a file
/// write and to `stderr` otherwise.
pub fn execute(cfg: &ExperimentConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> io::Result<i32> {
    let report = run_experiment(cfg);
    match &cfg.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            report.write(cfg.format, &mut file)?;
            file.flush()?;
            for line in &report.summary {
                writeln!(stdout, "{line}")?;
            }
            writeln!(stdout, "wrote {}", path.display())?;
        }
        None => {
            report.write(cfg.format, &mut *stdout)?;
            for line in &report.summary {
                writeln!(stderr, "{line}")?;
            }
        }
    }
    Ok(if report.all_failed() { exit::ALL_FAILED } else { exit::OK })
}
