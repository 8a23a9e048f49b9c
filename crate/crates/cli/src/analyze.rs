//! `analyze dist|tail|bound`.

use std::io::Write;

use pqproc_analysis::{analytic_sigma, monte_carlo_distribution, single_product_bound, tail_log2_prob, worst_case_bound};
use pqproc_core::saber::SaberLevel;
use pqproc_core::PrimeCtx;

use crate::error::CliError;
use crate::{say, AnalyzeCommand};

/// `12582912` → `12,582,912`.
fn grouped(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn run(cmd: AnalyzeCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        AnalyzeCommand::Dist { level, trials, seed } => {
            let level: SaberLevel = level.parse()?;
            let a = analytic_sigma(level);
            say(out, format_args!("level = {}\n", level.name()))?;
            say(out, format_args!("analytic_sigma = {:.2}\n", a.sigma))?;
            say(out, format_args!("analytic_accumulated_sigma = {:.2}\n", a.accumulated_sigma))?;
            if trials > 0 {
                let mc = monte_carlo_distribution(level, trials, seed)?;
                let d = mc.distribution;
                say(out, format_args!("trials = {}\n", mc.trials))?;
                say(out, format_args!("sampled_mean = {:.2}\n", d.mean))?;
                say(out, format_args!("sampled_sigma = {:.2}\n", d.sigma))?;
                say(out, format_args!("sampled_accumulated_sigma = {:.2}\n", d.accumulated_sigma))?;
                say(out, format_args!("max_abs = {}\n", mc.max_abs))?;
                say(out, format_args!("ks_statistic = {:.5}\n", mc.ks_statistic))?;
            }
            Ok(())
        }
        AnalyzeCommand::Tail { level, prime } => {
            let level: SaberLevel = level.parse()?;
            let bits: Vec<u32> = match prime {
                Some(b) => vec![b],
                None => vec![23, 24, 25],
            };
            let dist = analytic_sigma(level);
            say(out, format_args!("level = {}\n", level.name()))?;
            for b in bits {
                let ctx = PrimeCtx::from_bits(b)?;
                let e = tail_log2_prob(&dist, ctx);
                say(out, format_args!("q{b} = {}: log2_error_probability = {:.1}\n", ctx.q(), e.log2_prob))?;
            }
            Ok(())
        }
        AnalyzeCommand::Bound { level } => {
            let level: SaberLevel = level.parse()?;
            let row = worst_case_bound(level);
            let single = single_product_bound(level);
            say(out, format_args!("level = {}\n", level.name()))?;
            say(out, format_args!("single product peak {}\n", grouped(single.bound)))?;
            say(out, format_args!("peak {}\n", grouped(row.bound)))?;
            match row.min_prime_bits {
                Some(b) => say(out, format_args!("{b}-bit required\n")),
                None => say(out, format_args!("no supported prime is wide enough\n")),
            }
        }
    }
}
