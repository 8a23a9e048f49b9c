//! Command-line front end: KEM and signature operations, KAT checks, the
//! prime-selection statistics and the instruction-set simulator.

mod analyze;
mod error;
mod hexio;
mod kat;
mod keys;
mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

/// Environment variable naming the directory searched for KAT files
/// given by bare name.
pub const KAT_DIR_ENV: &str = "PQPROC_KAT_DIR";

#[derive(Debug, Parser)]
#[command(name = "pqproc", version, about = "Saber and Dilithium on a shared cryptoprocessor model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Saber key encapsulation.
    #[command(subcommand)]
    Kem(KemCommand),
    /// Dilithium signatures.
    #[command(subcommand)]
    Sig(SigCommand),
    /// Known-answer tests.
    #[command(subcommand)]
    Kat(KatCommand),
    /// Coefficient growth and prime selection.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Runs a program on the processor model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SaberOpts {
    /// lightsaber, saber or firesaber.
    #[arg(long, default_value = "saber")]
    pub level: String,
    /// Bit width of the NTT prime: 23, 24 or 25.
    #[arg(long, default_value_t = 25)]
    pub prime: u32,
    /// Also write each output field to `<DIR>/<name>.hex`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KemCommand {
    Keygen {
        #[command(flatten)]
        opts: SaberOpts,
        /// Hex seed; random when absent.
        #[arg(long)]
        seed: Option<String>,
    },
    Encaps {
        #[command(flatten)]
        opts: SaberOpts,
        /// File holding the public key in hex.
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        seed: Option<String>,
    },
    Decaps {
        #[command(flatten)]
        opts: SaberOpts,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct DilithiumOpts {
    /// 2, 3 or 5.
    #[arg(long, default_value = "3")]
    pub level: String,
    /// Not accepted: Dilithium always uses the 23-bit prime.
    #[arg(long, hide = true)]
    pub prime: Option<u32>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SigCommand {
    Keygen {
        #[command(flatten)]
        opts: DilithiumOpts,
        #[arg(long)]
        seed: Option<String>,
    },
    Sign {
        #[command(flatten)]
        opts: DilithiumOpts,
        #[arg(long)]
        sk: PathBuf,
        /// File holding the message in hex.
        #[arg(long)]
        msg: PathBuf,
    },
    Verify {
        #[command(flatten)]
        opts: DilithiumOpts,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum KatCommand {
    /// Regenerates every entry of a response file and compares.
    Run {
        /// Path, or a bare name looked up in the KAT directory.
        #[arg(long)]
        file: PathBuf,
        /// Parameter set; taken from the file name when absent.
        #[arg(long)]
        scheme: Option<String>,
        /// Route Saber products through this prime instead of the default.
        #[arg(long)]
        prime: Option<u32>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Deviation of a product coefficient, analytic and sampled.
    Dist {
        #[arg(long, default_value = "saber")]
        level: String,
        /// Monte Carlo trials; 0 skips sampling.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// log2 probability that an accumulated coefficient leaves a prime's range.
    Tail {
        #[arg(long, default_value = "saber")]
        level: String,
        #[arg(long)]
        prime: Option<u32>,
    },
    /// Worst-case coefficient and the prime width it needs.
    Bound {
        #[arg(long, default_value = "saber")]
        level: String,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Program text file.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub program: Option<PathBuf>,
    /// A builtin program as `scheme:operation:level`, e.g. `saber:decaps:saber`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// serial, parallel or both.
    #[arg(long, default_value = "parallel")]
    pub mode: String,
    /// Write the per-instruction trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Cost table file; the shipped table when absent.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Cycles added before each issue slot.
    #[arg(long, default_value_t = 2)]
    pub overhead: u64,
    /// Time one pass without executing (for programs that need inputs).
    #[arg(long)]
    pub static_timing: bool,
    /// Write the program text (useful with --builtin).
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Kem(c) => keys::kem(c, out),
        Command::Sig(c) => keys::sig(c, out),
        Command::Kat(KatCommand::Run { file, scheme, prime, jobs }) => kat::run(&file, scheme.as_deref(), prime, jobs, out),
        Command::Analyze(c) => analyze::run(c, out),
        Command::Simulate(a) => simulate::run(&a, out),
    }
}

pub(crate) fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::Io(e.to_string()))
}
