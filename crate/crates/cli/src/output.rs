//! Output plumbing shared by the subcommands.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use adscore_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes rendered bytes to the output path, or stdout when none is given.
pub fn write_output(path: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => {
            let mut file = File::create(path)?;
            file.write_all(bytes)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn open_input(path: &Path) -> Result<File> {
    Ok(File::open(path)?)
}
