//! Seed expansion: the public matrix, the secrets and the signing mask.

use super::params::{DilithiumParams, CRH_BYTES, SEED_BYTES};
use crate::keccak::samplers::{gamma_width, sample_eta, sample_gamma, sample_uniform_q};
use crate::keccak::{ExtractMode, HashMode, XofStream};
use crate::poly::{Modulus, Poly, PolyMat, PolyVec, N};
use crate::{Error, PrimeCtx};

fn field() -> Modulus {
    Modulus::Prime(PrimeCtx::q23())
}

fn expect_len(what: &'static str, bytes: &[u8], expected: usize) -> Result<(), Error> {
    if bytes.len() != expected {
        return Err(Error::InvalidLength {
            what,
            expected,
            got: bytes.len(),
        });
    }
    Ok(())
}

/// One uniform polynomial, already in the NTT domain by convention.
pub fn uniform_poly(rho: &[u8], nonce: u16) -> Result<Poly, Error> {
    let n = nonce.to_le_bytes();
    let mut s = XofStream::new(HashMode::Shake128, &[rho, &n], ExtractMode::Direct(24));
    let mut p = Poly::zero(field());
    for c in p.coeffs.iter_mut() {
        *c = sample_uniform_q(&mut s)?;
    }
    Ok(p)
}

/// `A[i][j]` from nonce `256·i + j`.
pub fn expand_a(rho: &[u8], params: &DilithiumParams) -> Result<PolyMat, Error> {
    expect_len("rho", rho, SEED_BYTES)?;
    let rows = (0..params.k)
        .map(|i| {
            let row = (0..params.l)
                .map(|j| uniform_poly(rho, ((i << 8) + j) as u16))
                .collect::<Result<Vec<_>, _>>()?;
            PolyVec::new(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    PolyMat::new(rows)
}

pub fn eta_poly(seed: &[u8], nonce: u16, eta: u32) -> Result<Poly, Error> {
    let n = nonce.to_le_bytes();
    let mut s = XofStream::new(HashMode::Shake256, &[seed, &n], ExtractMode::Direct(4));
    let mut v = [0i64; N];
    for c in v.iter_mut() {
        *c = sample_eta(&mut s, eta)? as i64;
    }
    Poly::from_signed(field(), &v)
}

/// `(s1, s2)` with nonces `0..l` and `l..l+k`.
pub fn expand_s(seed: &[u8], params: &DilithiumParams) -> Result<(PolyVec, PolyVec), Error> {
    expect_len("secret seed", seed, CRH_BYTES)?;
    let s1 = (0..params.l)
        .map(|i| eta_poly(seed, i as u16, params.eta))
        .collect::<Result<Vec<_>, _>>()?;
    let s2 = (0..params.k)
        .map(|i| eta_poly(seed, (params.l + i) as u16, params.eta))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((PolyVec::new(s1)?, PolyVec::new(s2)?))
}

pub fn gamma_poly(seed: &[u8], nonce: u16, gamma1: u32) -> Result<Poly, Error> {
    let n = nonce.to_le_bytes();
    let width = gamma_width(gamma1)?;
    let mut s = XofStream::new(HashMode::Shake256, &[seed, &n], ExtractMode::Direct(width));
    let mut v = [0i64; N];
    for c in v.iter_mut() {
        *c = sample_gamma(&mut s, gamma1)? as i64;
    }
    Poly::from_signed(field(), &v)
}

/// Mask `y` for attempt `kappa`: polynomial `i` uses nonce `l·kappa + i`.
pub fn expand_mask(seed: &[u8], kappa: u16, params: &DilithiumParams) -> Result<PolyVec, Error> {
    expect_len("mask seed", seed, CRH_BYTES)?;
    let polys = (0..params.l)
        .map(|i| gamma_poly(seed, (params.l as u16).wrapping_mul(kappa).wrapping_add(i as u16), params.gamma1))
        .collect::<Result<Vec<_>, _>>()?;
    PolyVec::new(polys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilithium::DilithiumLevel;
    use crate::keccak::shake128;

    #[test]
    fn uniform_matches_byte_parser() {
        // Independent parse: three bytes at a time from one long squeeze.
        let rho = [7u8; 32];
        let mut input = rho.to_vec();
        input.extend_from_slice(&[1, 2]);
        let bytes = shake128(&input, 168 * 10);
        let mut want = Vec::new();
        for c in bytes.chunks(3) {
            let t = (c[0] as u32 | (c[1] as u32) << 8 | (c[2] as u32) << 16) & 0x7f_ffff;
            if t < 8_380_417 && want.len() < N {
                want.push(t);
            }
        }
        let p = uniform_poly(&rho, 0x0201).unwrap();
        assert_eq!(p.coeffs.to_vec(), want);
    }

    #[test]
    fn ranges() {
        let p = DilithiumLevel::Dilithium3.params();
        let a = expand_a(&[1u8; 32], &p).unwrap();
        assert_eq!((a.rows(), a.cols()), (6, 5));
        assert!(a.rows.iter().flat_map(|r| &r.polys).all(|q| q.coeffs.iter().all(|&c| c < 8_380_417)));
        let (s1, s2) = expand_s(&[2u8; 64], &p).unwrap();
        assert_eq!((s1.len(), s2.len()), (5, 6));
        for q in s1.polys.iter().chain(&s2.polys) {
            assert!(q.centered().iter().all(|&c| c.abs() <= 4));
        }
        let y = expand_mask(&[3u8; 64], 0, &p).unwrap();
        for q in &y.polys {
            assert!(q.centered().iter().all(|&c| c > -(1 << 19) && c <= 1 << 19));
        }
    }

    #[test]
    fn seed_lengths_checked() {
        let p = DilithiumLevel::Dilithium2.params();
        assert!(expand_a(&[0u8; 31], &p).is_err());
        assert!(expand_s(&[0u8; 32], &p).is_err());
        assert!(expand_mask(&[0u8; 32], 0, &p).is_err());
    }
}
