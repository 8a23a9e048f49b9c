//! Hex files and `name = hex` output lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Bytes of a hex file; surrounding whitespace is ignored.
pub fn read_hex(path: &Path) -> Result<Vec<u8>, CliError> {
    let text = read_text(path)?;
    parse_hex(text.trim()).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_hex(s: &str) -> Result<Vec<u8>, String> {
    hex::decode(s).map_err(|e| format!("bad hex: {e}"))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Prints `name = hex` per field and, with an output directory, also
/// writes each field to `<dir>/<name>.hex`.
pub fn emit(out: &mut dyn Write, dir: Option<&PathBuf>, fields: &[(&str, &[u8])]) -> Result<(), CliError> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    for (name, bytes) in fields {
        let h = hex::encode(bytes);
        writeln!(out, "{name} = {h}").map_err(|e| CliError::Io(e.to_string()))?;
        if let Some(dir) = dir {
            write_file(&dir.join(format!("{name}.hex")), &format!("{h}\n"))?;
        }
    }
    Ok(())
}
