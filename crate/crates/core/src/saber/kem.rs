//! Saber KEM with implicit rejection.

use rand_core::RngCore;

use super::mul::{inner_prod, mv_mul, SaberMultiplier};
use super::pack::{bs2polvec, cmov, msg_to_poly, pack_bits, poly_to_msg, polvec_to_bytes, unpack_bits, verify_ct};
use super::params::*;
use crate::keccak::{sha3_256, sha3_512, shake128, ExtractMode, HashMode, XofStream};
use crate::keccak::samplers::sample_binomial;
use crate::poly::{Modulus, Poly, PolyMat, PolyVec, N};
use crate::Error;

/// Public matrix from a 32-byte seed, read as 13-bit coefficients.
pub fn gen_matrix(seed: &[u8], params: &SaberParams) -> Result<PolyMat, Error> {
    let mut stream = XofStream::new(HashMode::Shake128, &[seed], ExtractMode::Coeff13);
    gen_matrix_from(&mut stream, params)
}

/// Matrix generation from an existing 13-bit stream (exposed so callers can
/// inspect the stream counters afterwards).
pub fn gen_matrix_from(stream: &mut XofStream, params: &SaberParams) -> Result<PolyMat, Error> {
    let l = params.l;
    let mut rows = Vec::with_capacity(l);
    for _ in 0..l {
        let mut row = Vec::with_capacity(l);
        for _ in 0..l {
            let mut p = Poly::zero(Modulus::SABER_Q);
            for k in (0..N).step_by(2) {
                let (a, b) = stream.next_coeff_pair()?;
                p.coeffs[k] = a as u32;
                p.coeffs[k + 1] = b as u32;
            }
            row.push(p);
        }
        rows.push(PolyVec::new(row)?);
    }
    PolyMat::new(rows)
}

/// Secret vector sampled from the centered binomial distribution.
pub fn gen_secret(seed: &[u8], params: &SaberParams) -> Result<PolyVec, Error> {
    let mut stream = XofStream::new(HashMode::Shake128, &[seed], ExtractMode::Direct(params.mu));
    let mut polys = Vec::with_capacity(params.l);
    for _ in 0..params.l {
        let mut v = [0i64; N];
        for c in v.iter_mut() {
            *c = sample_binomial(&mut stream, params.mu)? as i64;
        }
        polys.push(Poly::from_signed(Modulus::SABER_Q, &v)?);
    }
    PolyVec::new(polys)
}

/// Rounding from `2^13` to `2^10`: add `h1`, shift right by 3.
pub fn add_round(acc: &PolyVec, params: &SaberParams) -> PolyVec {
    let polys = acc
        .polys
        .iter()
        .map(|p| {
            let mut out = Poly::zero(Modulus::SABER_P);
            for (o, &c) in out.coeffs.iter_mut().zip(&p.coeffs) {
                *o = ((c + params.h1()) >> (EQ - EP)) & ((1 << EP) - 1);
            }
            out
        })
        .collect();
    PolyVec { polys }
}

/// Folds the message into `v` and packs the result at `ε_T` bits.
pub fn add_pack(v: &Poly, msg: &[u8; 32], params: &SaberParams) -> Vec<u8> {
    let m = msg_to_poly(msg);
    let mut out = [0u32; N];
    for k in 0..N {
        let t = (v.coeffs[k] + params.h1()).wrapping_sub(m[k] << (EP - 1)) & ((1 << EP) - 1);
        out[k] = t >> (EP - params.et);
    }
    pack_bits(&out, params.et)
}

/// Recovers the message bits from `v` and the packed `c_m`.
pub fn unpack_msg(v: &Poly, cm: &[u8], params: &SaberParams) -> Result<[u8; 32], Error> {
    if cm.len() != params.scale_bytes() {
        return Err(Error::InvalidLength {
            what: "message ciphertext part",
            expected: params.scale_bytes(),
            got: cm.len(),
        });
    }
    let c = unpack_bits(cm, params.et, N);
    let mut bits = [0u32; N];
    for k in 0..N {
        let t = (v.coeffs[k] + params.h2()).wrapping_sub(c[k] << (EP - params.et)) & ((1 << EP) - 1);
        bits[k] = t >> (EP - 1);
    }
    Ok(poly_to_msg(&bits))
}

/// Saber KEM at one security level with a chosen multiplier.
#[derive(Clone, Copy, Debug)]
pub struct SaberKem {
    pub params: SaberParams,
    pub mul: SaberMultiplier,
}

/// Encoded key pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaberKeyPair {
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
}

fn check_len(what: &'static str, bytes: &[u8], expected: usize) -> Result<(), Error> {
    if bytes.len() != expected {
        return Err(Error::InvalidLength {
            what,
            expected,
            got: bytes.len(),
        });
    }
    Ok(())
}

impl SaberKem {
    pub fn new(level: SaberLevel, mul: SaberMultiplier) -> Self {
        Self {
            params: level.params(),
            mul,
        }
    }

    /// Deterministic key generation from the three 32-byte random inputs
    /// (matrix seed, noise seed, rejection key).
    pub fn keygen_from(&self, seed_a: &[u8; 32], noise: &[u8; 32], z: &[u8; 32]) -> Result<SaberKeyPair, Error> {
        let p = &self.params;
        let seed_a = shake128(seed_a, SEED_BYTES);
        let s = gen_secret(noise, p)?;
        let a = gen_matrix(&seed_a, p)?;
        let b = add_round(&mv_mul(&a, &s, self.mul, true)?, p);

        let mut pk = polvec_to_bytes(&b, EP);
        pk.extend_from_slice(&seed_a);

        let mut sk = polvec_to_bytes(&s, EQ);
        sk.extend_from_slice(&pk);
        sk.extend_from_slice(&sha3_256(&pk));
        sk.extend_from_slice(z);
        Ok(SaberKeyPair { pk, sk })
    }

    pub fn keygen(&self, rng: &mut impl RngCore) -> Result<SaberKeyPair, Error> {
        let mut seed_a = [0u8; 32];
        let mut noise = [0u8; 32];
        let mut z = [0u8; 32];
        rng.fill_bytes(&mut seed_a);
        rng.fill_bytes(&mut noise);
        rng.fill_bytes(&mut z);
        self.keygen_from(&seed_a, &noise, &z)
    }

    fn indcpa_enc(&self, msg: &[u8; 32], noise: &[u8], pk: &[u8]) -> Result<Vec<u8>, Error> {
        let p = &self.params;
        let (packed_b, seed_a) = pk.split_at(p.polyvec_compressed_bytes());
        let s = gen_secret(noise, p)?;
        let a = gen_matrix(seed_a, p)?;
        let b_prime = add_round(&mv_mul(&a, &s, self.mul, false)?, p);
        let mut ct = polvec_to_bytes(&b_prime, EP);

        let b = bs2polvec(packed_b, p.l, Modulus::SABER_P)?;
        let v = inner_prod(&b, &s, self.mul)?;
        ct.extend(add_pack(&v, msg, p));
        Ok(ct)
    }

    fn indcpa_dec(&self, sk: &[u8], ct: &[u8]) -> Result<[u8; 32], Error> {
        let p = &self.params;
        let s = bs2polvec(&sk[..p.polyvec_bytes()], p.l, Modulus::SABER_Q)?;
        let (packed_b, cm) = ct.split_at(p.polyvec_compressed_bytes());
        let b = bs2polvec(packed_b, p.l, Modulus::SABER_P)?;
        let v = inner_prod(&b, &s, self.mul)?;
        unpack_msg(&v, cm, p)
    }

    /// Encapsulation with explicit 32 bytes of randomness.
    pub fn encaps_from(&self, pk: &[u8], coins: &[u8; 32]) -> Result<(Vec<u8>, [u8; 32]), Error> {
        check_len("public key", pk, self.params.public_key_bytes())?;
        let mut buf = [0u8; 64];
        buf[..32].copy_from_slice(&sha3_256(coins));
        buf[32..].copy_from_slice(&sha3_256(pk));
        let mut kr = sha3_512(&buf);
        let msg: [u8; 32] = buf[..32].try_into().expect("32 bytes");
        let ct = self.indcpa_enc(&msg, &kr[32..], pk)?;
        kr[32..].copy_from_slice(&sha3_256(&ct));
        Ok((ct, sha3_256(&kr)))
    }

    pub fn encaps(&self, pk: &[u8], rng: &mut impl RngCore) -> Result<(Vec<u8>, [u8; 32]), Error> {
        let mut coins = [0u8; 32];
        rng.fill_bytes(&mut coins);
        self.encaps_from(pk, &coins)
    }

    /// Decapsulation; a ciphertext that fails re-encryption yields the
    /// keyed pseudo-random secret rather than an error.
    pub fn decaps(&self, sk: &[u8], ct: &[u8]) -> Result<[u8; 32], Error> {
        let p = &self.params;
        check_len("secret key", sk, p.secret_key_bytes())?;
        check_len("ciphertext", ct, p.ciphertext_bytes())?;
        let pk_off = p.indcpa_secret_key_bytes();
        let pk = &sk[pk_off..pk_off + p.public_key_bytes()];
        let hpk = &sk[p.secret_key_bytes() - 64..p.secret_key_bytes() - 32];
        let z = &sk[p.secret_key_bytes() - KEY_BYTES..];

        let mut buf = [0u8; 64];
        buf[..32].copy_from_slice(&self.indcpa_dec(sk, ct)?);
        buf[32..].copy_from_slice(hpk);
        let mut kr = sha3_512(&buf);
        let msg: [u8; 32] = buf[..32].try_into().expect("32 bytes");
        let cmp = self.indcpa_enc(&msg, &kr[32..], pk)?;
        let fail = verify_ct(ct, &cmp)?;
        kr[32..].copy_from_slice(&sha3_256(ct));
        cmov(&mut kr[..32], z, fail)?;
        Ok(sha3_256(&kr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PrimeCtx;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matrix_range_and_determinism() {
        let p = SaberLevel::Saber.params();
        let a = gen_matrix(&[3u8; 32], &p).unwrap();
        assert_eq!((a.rows(), a.cols()), (3, 3));
        assert!(a.rows.iter().flat_map(|r| &r.polys).all(|q| q.coeffs.iter().all(|&c| c < 8192)));
        assert_eq!(a, gen_matrix(&[3u8; 32], &p).unwrap());
    }

    #[test]
    fn matrix_generation_leftover_invariant() {
        for level in SaberLevel::ALL {
            let p = level.params();
            let mut s = XofStream::new(HashMode::Shake128, &[&[9u8; 32]], ExtractMode::Coeff13);
            gen_matrix_from(&mut s, &p).unwrap();
            let hist = &s.stats().leftover_history;
            assert!(!hist.is_empty());
            assert!(hist.iter().all(|&c| c % 2 == 0 && c <= 24));
        }
    }

    #[test]
    fn secret_range() {
        for level in SaberLevel::ALL {
            let p = level.params();
            let s = gen_secret(&[1u8; 32], &p).unwrap();
            let half = p.mu as i64 / 2;
            assert!(s.polys.iter().all(|q| q.centered().iter().all(|&c| c.abs() <= half)));
        }
    }

    #[test]
    fn rounding_steps() {
        let p = SaberLevel::Saber.params();
        let zero = add_round(&PolyVec::zero(Modulus::SABER_Q, 1), &p);
        assert!(zero.polys[0].coeffs.iter().all(|&c| c == 0));
        let mut x = PolyVec::zero(Modulus::SABER_Q, 1);
        x.polys[0].coeffs[0] = 100;
        x.polys[0].coeffs[1] = 108;
        let r = add_round(&x, &p);
        assert_eq!(r.polys[0].coeffs[1], r.polys[0].coeffs[0] + 1);
    }

    #[test]
    fn pack_then_unpack_without_noise() {
        for level in SaberLevel::ALL {
            let p = level.params();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
            let msg: [u8; 32] = rng.gen();
            let v = Poly::zero(Modulus::SABER_P);
            let cm = add_pack(&v, &msg, &p);
            assert_eq!(cm.len(), 256 * p.et as usize / 8);
            assert_eq!(unpack_msg(&v, &cm, &p).unwrap(), msg);
        }
    }

    #[test]
    fn round_trip_all_levels_and_primes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for level in SaberLevel::ALL {
            for ctx in [PrimeCtx::q23(), PrimeCtx::q24(), PrimeCtx::q25()] {
                let kem = SaberKem::new(level, SaberMultiplier::Ntt(ctx));
                for _ in 0..3 {
                    let kp = kem.keygen(&mut rng).unwrap();
                    let (ct, ss) = kem.encaps(&kp.pk, &mut rng).unwrap();
                    assert_eq!(kem.decaps(&kp.sk, &ct).unwrap(), ss);
                    let mut bad = ct.clone();
                    bad[10] ^= 1;
                    assert_ne!(kem.decaps(&kp.sk, &bad).unwrap(), ss);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let kem = SaberKem::new(SaberLevel::LightSaber, SaberMultiplier::default());
        assert!(kem.encaps_from(&[0u8; 10], &[0; 32]).is_err());
        assert!(kem.decaps(&[0u8; 10], &[0u8; 736]).is_err());
    }
}
