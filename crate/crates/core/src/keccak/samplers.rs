//! Samplers that draw directly from an [`XofStream`].

use super::{ExtractMode, HashMode, XofStream};
use crate::poly::{Modulus, Poly, N};
use crate::{Error, PrimeCtx};

/// Dilithium modulus.
pub const Q_DILITHIUM: u32 = 8_380_417;

/// Centered binomial sample: Hamming weight of the first `μ/2` bits minus
/// that of the next `μ/2`. The stream must be in `Direct(μ)` mode.
pub fn sample_binomial(stream: &mut XofStream, mu: u32) -> Result<i32, Error> {
    let bits = stream.next_bits(mu)?;
    Ok(binomial_from_bits(bits, mu))
}

/// The binomial rule applied to a `μ`-bit word.
pub fn binomial_from_bits(bits: u64, mu: u32) -> i32 {
    let half = mu / 2;
    let lo = bits & ((1 << half) - 1);
    let hi = (bits >> half) & ((1 << half) - 1);
    lo.count_ones() as i32 - hi.count_ones() as i32
}

/// Uniform residue mod the Dilithium prime from 24-bit candidates, keeping
/// the low 23 bits and rejecting values `>= q`.
pub fn sample_uniform_q(stream: &mut XofStream) -> Result<u32, Error> {
    loop {
        let candidate = accept_uniform(stream.next_bits(24)?);
        if let Some(v) = candidate {
            return Ok(v);
        }
    }
}

/// Acceptance rule for one 24-bit candidate.
pub fn accept_uniform(bits: u64) -> Option<u32> {
    let t = (bits & 0x7f_ffff) as u32;
    (t < Q_DILITHIUM).then_some(t)
}

/// Acceptance rule for one nibble of the η sampler.
pub fn accept_eta(nibble: u32, eta: u32) -> Option<i32> {
    match eta {
        2 if nibble < 15 => Some(2 - (nibble - (205 * nibble >> 10) * 5) as i32),
        4 if nibble < 9 => Some(4 - nibble as i32),
        _ => None,
    }
}

/// Signed value in `[-η, η]` from 4-bit candidates.
pub fn sample_eta(stream: &mut XofStream, eta: u32) -> Result<i32, Error> {
    if eta != 2 && eta != 4 {
        return Err(Error::OutOfRange {
            what: "eta",
            value: eta as i64,
        });
    }
    loop {
        if let Some(v) = accept_eta(stream.next_bits(4)? as u32, eta) {
            return Ok(v);
        }
    }
}

/// Bit width of one mask candidate for `γ1`.
pub fn gamma_width(gamma1: u32) -> Result<u32, Error> {
    match gamma1 {
        0x20000 => Ok(18),
        0x80000 => Ok(20),
        _ => Err(Error::OutOfRange {
            what: "gamma1",
            value: gamma1 as i64,
        }),
    }
}

/// Mask coefficient `γ1 - v` for an 18 or 20-bit candidate `v`.
pub fn sample_gamma(stream: &mut XofStream, gamma1: u32) -> Result<i32, Error> {
    let width = gamma_width(gamma1)?;
    let v = stream.next_bits(width)? as i32;
    Ok(gamma1 as i32 - v)
}

/// Challenge polynomial with exactly `τ` coefficients equal to ±1.
pub fn sample_in_ball(seed: &[u8], tau: usize) -> Result<Poly, Error> {
    let mut stream = XofStream::new(HashMode::Shake256, &[seed], ExtractMode::Buffered192);
    let mut signs = stream.next_bits(64)?;
    let ctx = PrimeCtx::q23();
    let mut c = Poly::zero(Modulus::Prime(ctx));
    for i in N - tau..N {
        let b = loop {
            let b = stream.next_bits(8)? as usize;
            if b <= i {
                break b;
            }
        };
        c.coeffs[i] = c.coeffs[b];
        c.coeffs[b] = if signs & 1 == 1 { ctx.q() - 1 } else { 1 };
        signs >>= 1;
    }
    Ok(c)
}
