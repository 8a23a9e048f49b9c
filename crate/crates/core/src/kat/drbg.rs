//! AES-256 CTR_DRBG as used by the NIST known-answer-test generators.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes256;
use rand_core::{impls, CryptoRng, RngCore};

/// Deterministic generator seeded from 48 bytes of entropy. Every
/// `fill_bytes` call corresponds to one `randombytes` call of the reference
/// harness, so call boundaries matter.
#[derive(Clone)]
pub struct NistDrbg {
    key: [u8; 32],
    v: [u8; 16],
    reseed_counter: u64,
}

impl std::fmt::Debug for NistDrbg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NistDrbg").field("reseed_counter", &self.reseed_counter).finish()
    }
}

fn increment(v: &mut [u8; 16]) {
    for b in v.iter_mut().rev() {
        if *b == 0xff {
            *b = 0;
        } else {
            *b += 1;
            break;
        }
    }
}

fn encrypt(key: &[u8; 32], block: &[u8; 16]) -> [u8; 16] {
    let cipher = Aes256::new(key.into());
    let mut b = (*block).into();
    cipher.encrypt_block(&mut b);
    b.into()
}

impl NistDrbg {
    pub fn new(entropy: &[u8; 48]) -> Self {
        let mut d = Self {
            key: [0; 32],
            v: [0; 16],
            reseed_counter: 0,
        };
        d.update(Some(entropy));
        d.reseed_counter = 1;
        d
    }

    fn update(&mut self, provided: Option<&[u8; 48]>) {
        let mut temp = [0u8; 48];
        for chunk in temp.chunks_exact_mut(16) {
            increment(&mut self.v);
            chunk.copy_from_slice(&encrypt(&self.key, &self.v));
        }
        if let Some(p) = provided {
            for (t, x) in temp.iter_mut().zip(p) {
                *t ^= x;
            }
        }
        self.key.copy_from_slice(&temp[..32]);
        self.v.copy_from_slice(&temp[32..]);
    }

    /// One `randombytes` call.
    pub fn random_bytes(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(16) {
            increment(&mut self.v);
            let block = encrypt(&self.key, &self.v);
            chunk.copy_from_slice(&block[..chunk.len()]);
        }
        self.update(None);
        self.reseed_counter += 1;
    }
}

impl RngCore for NistDrbg {
    fn next_u32(&mut self) -> u32 {
        impls::next_u32_via_fill(self)
    }

    fn next_u64(&mut self) -> u64 {
        impls::next_u64_via_fill(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.random_bytes(dest);
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.random_bytes(dest);
        Ok(())
    }
}

impl CryptoRng for NistDrbg {}

/// The entropy input used by the reference generators: bytes 0, 1, ..., 47.
pub fn kat_entropy() -> [u8; 48] {
    std::array::from_fn(|i| i as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_seed_of_reference_files() {
        let mut d = NistDrbg::new(&kat_entropy());
        let mut seed = [0u8; 48];
        d.fill_bytes(&mut seed);
        assert_eq!(
            hex::encode_upper(seed),
            "061550234D158C5EC95595FE04EF7A25767F2E24CC2BC479D09D86DC9ABCFDE7056A8C266F9EF97ED08541DBD2E1FFA1"
        );
        let mut msg = [0u8; 33];
        d.fill_bytes(&mut msg);
        assert_eq!(hex::encode_upper(msg), "D81C4D8D734FCBFBEADE3D3F8A039FAA2A2C9957E835AD55B22E75BF57BB556AC8");
    }
}
