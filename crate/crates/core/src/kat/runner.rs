//! Regenerates known-answer entries for either scheme and compares them
//! against a response file.

use std::fmt;
use std::str::FromStr;
use std::thread;

use rand_core::RngCore;
use sha2::{Digest, Sha256};

use super::drbg::{kat_entropy, NistDrbg};
use super::rsp::{render_entry, KatEntry, KatFile};
use crate::dilithium::{Dilithium, DilithiumLevel, DilithiumMultiplier};
use crate::saber::{SaberKem, SaberLevel, SaberMultiplier};
use crate::{Error, PrimeCtx};

/// Scheme, level and multiplier choice for one KAT run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KatScheme {
    Saber(SaberLevel, SaberMultiplier),
    Dilithium(DilithiumLevel, DilithiumMultiplier),
}

impl KatScheme {
    /// The six parameter sets with default multipliers.
    pub fn all() -> Vec<KatScheme> {
        SaberLevel::ALL
            .into_iter()
            .map(|l| KatScheme::Saber(l, SaberMultiplier::default()))
            .chain(
                DilithiumLevel::ALL
                    .into_iter()
                    .map(|l| KatScheme::Dilithium(l, DilithiumMultiplier::default())),
            )
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            KatScheme::Saber(l, _) => l.name(),
            KatScheme::Dilithium(l, _) => l.name(),
        }
    }

    /// File stem of the response file, e.g. `firesaber`.
    pub fn file_stem(&self) -> String {
        self.name().to_ascii_lowercase()
    }

    /// Same parameter set, Saber products routed through another prime.
    pub fn with_prime(self, ctx: PrimeCtx) -> KatScheme {
        match self {
            KatScheme::Saber(l, _) => KatScheme::Saber(l, SaberMultiplier::Ntt(ctx)),
            other => other,
        }
    }

    fn is_signature(&self) -> bool {
        matches!(self, KatScheme::Dilithium(..))
    }

    /// sha256 of the rendered count-0 entry, as published alongside the
    /// reference implementations.
    pub fn pinned_count0_sha256(&self) -> &'static str {
        match self {
            KatScheme::Saber(SaberLevel::LightSaber, _) => {
                "dc2233ae221cfabbb1db5ab1a76c93967d37de9f87a8092561f95ab28eff6061"
            }
            KatScheme::Saber(SaberLevel::Saber, _) => "c9e2c16f41f162c607a1d5704107159e5e12713b9bb8c356b1d68b216e79096e",
            KatScheme::Saber(SaberLevel::FireSaber, _) => {
                "937d9b2e139112e13d4093a6afe715deff476e4d578208b9e8e1809de43835cd"
            }
            KatScheme::Dilithium(DilithiumLevel::Dilithium2, _) => {
                "faa8998108fa541309c9df5044018c5d26cc23654594bef639dd64b838646cbd"
            }
            KatScheme::Dilithium(DilithiumLevel::Dilithium3, _) => {
                "8439f580566c46b99449b2cbbd597ce59bcd5d184b90c1108b79a08f6bdbbcb1"
            }
            KatScheme::Dilithium(DilithiumLevel::Dilithium5, _) => {
                "984ea5f06b13778292f60ecc07301af76e375f1bb9f4a39d676513439e1e83a2"
            }
        }
    }
}

impl fmt::Display for KatScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KatScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if let Ok(l) = s.parse::<SaberLevel>() {
            return Ok(KatScheme::Saber(l, SaberMultiplier::default()));
        }
        match s.parse::<DilithiumLevel>() {
            Ok(l) if s.to_ascii_lowercase().starts_with("dilithium") => {
                Ok(KatScheme::Dilithium(l, DilithiumMultiplier::default()))
            }
            _ => Err(Error::Malformed(format!("unknown KAT scheme `{s}`"))),
        }
    }
}

/// Seed and message of one entry, as drawn by the reference generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatInput {
    pub count: usize,
    pub seed: [u8; 48],
    /// Empty for the KEM.
    pub msg: Vec<u8>,
}

/// Draws `n` inputs from the DRBG seeded with the fixed entropy. Signature
/// generators also draw a `33·(i+1)`-byte message per entry.
pub fn kat_inputs(scheme: KatScheme, n: usize) -> Vec<KatInput> {
    let mut rng = NistDrbg::new(&kat_entropy());
    (0..n)
        .map(|count| {
            let mut seed = [0u8; 48];
            rng.fill_bytes(&mut seed);
            let mut msg = Vec::new();
            if scheme.is_signature() {
                msg = vec![0u8; 33 * (count + 1)];
                rng.fill_bytes(&mut msg);
            }
            KatInput { count, seed, msg }
        })
        .collect()
}

/// Regenerates one entry and runs the generator's own self-check
/// (decapsulation agrees, signed message opens).
pub fn generate_entry(scheme: KatScheme, input: &KatInput) -> Result<KatEntry, Error> {
    let mut rng = NistDrbg::new(&input.seed);
    let mut e = KatEntry {
        count: input.count,
        fields: Vec::new(),
    };
    e.push_hex("seed", &input.seed);
    match scheme {
        KatScheme::Saber(level, mul) => {
            let kem = SaberKem::new(level, mul);
            let kp = kem.keygen(&mut rng)?;
            let (ct, ss) = kem.encaps(&kp.pk, &mut rng)?;
            if kem.decaps(&kp.sk, &ct)? != ss {
                return Err(Error::Malformed(format!("{scheme} entry {}: decapsulation disagrees", input.count)));
            }
            e.push_hex("pk", &kp.pk);
            e.push_hex("sk", &kp.sk);
            e.push_hex("ct", &ct);
            e.push_hex("ss", &ss);
        }
        KatScheme::Dilithium(level, mul) => {
            let d = Dilithium::new(level, mul);
            let kp = d.keygen(&mut rng)?;
            let sm = d.sign_message(&kp.sk, &input.msg)?;
            if d.open(&kp.pk, &sm).as_deref() != Some(&input.msg[..]) {
                return Err(Error::Malformed(format!("{scheme} entry {}: signature does not open", input.count)));
            }
            e.push_number("mlen", input.msg.len());
            e.push_hex("msg", &input.msg);
            e.push_hex("pk", &kp.pk);
            e.push_hex("sk", &kp.sk);
            e.push_number("smlen", sm.len());
            e.push_hex("sm", &sm);
        }
    }
    Ok(e)
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    let chunk = items.len().div_ceil(jobs).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("KAT worker panicked"))
            .collect()
    })
}

/// A whole response file with `n` entries.
pub fn generate_file(scheme: KatScheme, n: usize, jobs: usize) -> Result<KatFile, Error> {
    let inputs = kat_inputs(scheme, n);
    let entries = par_map(&inputs, jobs, |i| generate_entry(scheme, i))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KatFile {
        name: Some(scheme.name().to_string()),
        entries,
    })
}

/// The count-0 entry in the layout used for the published digests.
pub fn render_count0(scheme: KatScheme) -> Result<String, Error> {
    let input = &kat_inputs(scheme, 1)[0];
    Ok(render_entry(&generate_entry(scheme, input)?))
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// First disagreement between a regenerated entry and the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatMismatch {
    pub count: usize,
    pub field: String,
    pub detail: String,
}

impl fmt::Display for KatMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "count {}: field `{}` {}", self.count, self.field, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatReport {
    pub scheme: KatScheme,
    pub total: usize,
    pub passed: usize,
    pub first_mismatch: Option<KatMismatch>,
}

impl KatReport {
    pub fn ok(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }
}

fn input_from_entry(e: &KatEntry) -> Result<KatInput, Error> {
    let seed = e.bytes("seed")?;
    let seed: [u8; 48] = seed.try_into().map_err(|v: Vec<u8>| Error::InvalidLength {
        what: "KAT seed",
        expected: 48,
        got: v.len(),
    })?;
    let msg = match e.get("msg") {
        Some(_) => e.bytes("msg")?,
        None => Vec::new(),
    };
    Ok(KatInput {
        count: e.count,
        seed,
        msg,
    })
}

fn compare(expected: &KatEntry, got: &KatEntry) -> Option<KatMismatch> {
    for (key, want) in &expected.fields {
        let detail = match got.get(key) {
            None => "is not produced".to_string(),
            Some(v) if !v.eq_ignore_ascii_case(want) => {
                let at = v.bytes().zip(want.bytes()).position(|(a, b)| !a.eq_ignore_ascii_case(&b));
                match at {
                    Some(p) => format!("differs at byte {}", p / 2),
                    None => format!("length {} vs expected {}", v.len() / 2, want.len() / 2),
                }
            }
            Some(_) => continue,
        };
        return Some(KatMismatch {
            count: expected.count,
            field: key.clone(),
            detail,
        });
    }
    None
}

/// Regenerates every entry of `file` from its own seed (and message) and
/// compares field by field. Stops counting at nothing; reports the first
/// mismatch in file order.
pub fn check_file(scheme: KatScheme, file: &KatFile, jobs: usize) -> KatReport {
    let results = par_map(&file.entries, jobs, |e| -> Option<KatMismatch> {
        let input = match input_from_entry(e) {
            Ok(i) => i,
            Err(err) => {
                return Some(KatMismatch {
                    count: e.count,
                    field: "seed".into(),
                    detail: err.to_string(),
                })
            }
        };
        match generate_entry(scheme, &input) {
            Ok(got) => compare(e, &got),
            Err(err) => Some(KatMismatch {
                count: e.count,
                field: "-".into(),
                detail: err.to_string(),
            }),
        }
    });
    let passed = results.iter().filter(|r| r.is_none()).count();
    KatReport {
        scheme,
        total: file.entries.len(),
        passed,
        first_mismatch: results.into_iter().flatten().next(),
    }
}
