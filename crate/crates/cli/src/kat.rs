//! `kat run`.

use std::io::Write;
use std::path::{Path, PathBuf};

use pqproc_core::kat::{check_file, KatFile, KatScheme};
use pqproc_core::PrimeCtx;

use crate::error::CliError;
use crate::hexio::read_text;
use crate::{say, KAT_DIR_ENV};

/// The path as given, or else the same name under the KAT directory.
fn locate(file: &Path) -> PathBuf {
    if file.exists() {
        return file.to_path_buf();
    }
    match std::env::var_os(KAT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(file),
        None => file.to_path_buf(),
    }
}

pub fn run(file: &Path, scheme: Option<&str>, prime: Option<u32>, jobs: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let path = locate(file);
    let text = read_text(&path)?;
    let name = match scheme {
        Some(s) => s.to_string(),
        None => path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Usage(format!("{}: cannot tell the scheme from the name; pass --scheme", path.display())))?
            .to_string(),
    };
    let mut scheme: KatScheme = name.parse()?;
    if let Some(bits) = prime {
        if matches!(scheme, KatScheme::Dilithium(..)) {
            return Err(CliError::Usage("--prime is not accepted: Dilithium always uses the 23-bit prime".into()));
        }
        scheme = scheme.with_prime(PrimeCtx::from_bits(bits)?);
    }
    let parsed = KatFile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let report = check_file(scheme, &parsed, jobs.max(1));
    say(out, format_args!("{}: {}/{} passed\n", scheme.name(), report.passed, report.total))?;
    match report.first_mismatch {
        Some(m) => Err(CliError::Failed(format!("KAT mismatch at {m}"))),
        None if report.total == 0 => Err(CliError::Failed("file has no entries".into())),
        None => Ok(()),
    }
}
