//! `kem` and `sig` subcommands.

use std::io::Write;

use rand::RngCore;

use pqproc_core::dilithium::{Dilithium, DilithiumLevel, DilithiumMultiplier};
use pqproc_core::keccak::{shake, HashMode};
use pqproc_core::saber::{SaberKem, SaberLevel, SaberMultiplier};
use pqproc_core::PrimeCtx;

use crate::error::CliError;
use crate::hexio::{emit, parse_hex, read_hex};
use crate::{say, DilithiumOpts, KemCommand, SaberOpts, SigCommand};

/// `len` bytes for `purpose`: expanded from the seed when one is given,
/// otherwise from the operating system.
fn randomness(seed: Option<&str>, purpose: &str, len: usize) -> Result<Vec<u8>, CliError> {
    match seed {
        Some(s) => {
            let seed = parse_hex(s).map_err(|e| CliError::Usage(format!("--seed: {e}")))?;
            Ok(shake(HashMode::Shake256, &[purpose.as_bytes(), &seed], len))
        }
        None => {
            let mut v = vec![0u8; len];
            rand::rngs::OsRng.fill_bytes(&mut v);
            Ok(v)
        }
    }
}

fn arr32(v: &[u8]) -> [u8; 32] {
    v.try_into().expect("32 bytes")
}

fn saber(opts: &SaberOpts) -> Result<SaberKem, CliError> {
    let level: SaberLevel = opts.level.parse()?;
    if !(23..=25).contains(&opts.prime) {
        return Err(CliError::Usage(format!("--prime {}: choose 23, 24 or 25", opts.prime)));
    }
    Ok(SaberKem::new(level, SaberMultiplier::Ntt(PrimeCtx::from_bits(opts.prime)?)))
}

pub fn kem(cmd: KemCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        KemCommand::Keygen { opts, seed } => {
            let kem = saber(&opts)?;
            let r = randomness(seed.as_deref(), "kem keygen", 96)?;
            let kp = kem.keygen_from(&arr32(&r[..32]), &arr32(&r[32..64]), &arr32(&r[64..]))?;
            emit(out, opts.out_dir.as_ref(), &[("pk", &kp.pk), ("sk", &kp.sk)])
        }
        KemCommand::Encaps { opts, pk, seed } => {
            let kem = saber(&opts)?;
            let pk = read_hex(&pk)?;
            let coins = randomness(seed.as_deref(), "kem encaps", 32)?;
            let (ct, ss) = kem.encaps_from(&pk, &arr32(&coins))?;
            emit(out, opts.out_dir.as_ref(), &[("ct", &ct), ("ss", &ss)])
        }
        KemCommand::Decaps { opts, sk, ct } => {
            let kem = saber(&opts)?;
            let ss = kem.decaps(&read_hex(&sk)?, &read_hex(&ct)?)?;
            emit(out, opts.out_dir.as_ref(), &[("ss", &ss)])
        }
    }
}

fn dilithium(opts: &DilithiumOpts) -> Result<Dilithium, CliError> {
    if opts.prime.is_some() {
        return Err(CliError::Usage("--prime is not accepted: Dilithium always uses the 23-bit prime".into()));
    }
    let level: DilithiumLevel = opts.level.parse()?;
    Ok(Dilithium::new(level, DilithiumMultiplier::Ntt))
}

pub fn sig(cmd: SigCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        SigCommand::Keygen { opts, seed } => {
            let d = dilithium(&opts)?;
            let r = randomness(seed.as_deref(), "sig keygen", 32)?;
            let kp = d.keygen_from_seed(&arr32(&r))?;
            emit(out, opts.out_dir.as_ref(), &[("pk", &kp.pk), ("sk", &kp.sk)])
        }
        SigCommand::Sign { opts, sk, msg } => {
            let d = dilithium(&opts)?;
            let s = d.sign(&read_hex(&sk)?, &read_hex(&msg)?)?;
            emit(out, opts.out_dir.as_ref(), &[("sig", &s.signature)])?;
            say(out, format_args!("iterations = {}\n", s.iterations))
        }
        SigCommand::Verify { opts, pk, msg, sig } => {
            let d = dilithium(&opts)?;
            if d.verify(&read_hex(&pk)?, &read_hex(&msg)?, &read_hex(&sig)?) {
                say(out, format_args!("valid\n"))
            } else {
                say(out, format_args!("invalid\n"))?;
                Err(CliError::Failed("signature does not verify".into()))
            }
        }
    }
}
