//! `simulate`.

use std::io::Write;

use pqproc_isa::{builtin_program, cycle_report, load_program, one_pass_cycles, CostTable, Memory, Mode, Program, SimConfig};

use crate::error::CliError;
use crate::hexio::{read_text, write_file};
use crate::{say, SimulateArgs};

fn program(args: &SimulateArgs) -> Result<Program, CliError> {
    if let Some(path) = &args.program {
        return load_program(&read_text(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    let triple = args.builtin.as_deref().unwrap_or_default();
    let parts: Vec<&str> = triple.split(':').collect();
    let [scheme, op, level] = parts[..] else {
        return Err(CliError::Usage(format!("--builtin {triple}: expected scheme:operation:level")));
    };
    builtin_program(scheme, op, level)
        .map(|b| b.program)
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let prog = program(args)?;
    if let Some(path) = &args.emit {
        write_file(path, &prog.to_text())?;
    }
    let costs = match &args.costs {
        Some(path) => read_text(path)?.parse::<CostTable>().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => CostTable::shipped(),
    };
    let config = SimConfig {
        costs,
        issue_overhead: args.overhead,
        ..SimConfig::default()
    };
    let modes: Vec<Mode> = match args.mode.as_str() {
        "both" => vec![Mode::Serial, Mode::Parallel],
        m => vec![m.parse().map_err(|e: String| CliError::Usage(e))?],
    };
    if modes.len() > 1 && args.trace.is_some() {
        return Err(CliError::Usage("--trace needs a single --mode".into()));
    }

    if args.static_timing {
        let totals: Vec<u64> = modes.iter().map(|&m| one_pass_cycles(&prog, m, &config)).collect();
        for (m, t) in modes.iter().zip(&totals) {
            say(out, format_args!("{m}_cycles = {t}\n"))?;
        }
        if let [s, p] = totals[..] {
            let r = if s == 0 { 0.0 } else { 100.0 * (s as f64 - p as f64) / s as f64 };
            say(out, format_args!("reduction_percent = {r:.2}\n"))?;
        }
        return Ok(());
    }

    let mut traces = Vec::new();
    for &m in &modes {
        traces.push(pqproc_isa::run(&prog, Memory::new(), m, &config)?.trace);
    }
    if let Some(path) = &args.trace {
        write_file(path, &traces[0].to_csv())?;
    }
    match &traces[..] {
        [t] => say(out, format_args!("{}", t.summary())),
        [s, p] => say(out, format_args!("{}", cycle_report(s, p))),
        _ => unreachable!(),
    }
}
