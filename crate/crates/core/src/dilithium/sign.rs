//! Key generation, the split signing flow and verification.

use rand_core::RngCore;

use super::expand::{expand_a, expand_mask, expand_s};
use super::packing::{hint_weight, pack_pk, pack_w1, unpack_pk, SecretKey, Signature};
use super::params::{DilithiumLevel, DilithiumParams, CRH_BYTES, D, SEED_BYTES, TR_BYTES};
use super::rounding::{decompose, make_hint_low, power2round, use_hint};
use crate::keccak::samplers::sample_in_ball;
use crate::keccak::{shake, HashMode};
use crate::ntt::{forward_in_place, inverse_in_place, pointwise_mul_acc, TwiddleTable};
use crate::poly::{schoolbook_negacyclic, Modulus, Poly, PolyMat, PolyVec, N};
use crate::{Error, PrimeCtx};

/// How ring products are evaluated. Both give identical results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DilithiumMultiplier {
    #[default]
    Ntt,
    Schoolbook,
}

fn ctx() -> PrimeCtx {
    PrimeCtx::q23()
}

fn field() -> Modulus {
    Modulus::Prime(ctx())
}

impl DilithiumMultiplier {
    /// Moves a normal-domain operand into the multiplier's working domain.
    fn prepare(self, p: &Poly) -> Poly {
        match self {
            DilithiumMultiplier::Ntt => {
                let mut out = p.clone();
                forward_in_place(&mut out.coeffs, TwiddleTable::cached(ctx()));
                out
            }
            DilithiumMultiplier::Schoolbook => p.clone(),
        }
    }

    fn prepare_vec(self, v: &PolyVec) -> Vec<Poly> {
        v.polys.iter().map(|p| self.prepare(p)).collect()
    }

    /// The public matrix is sampled in the NTT domain; the schoolbook path
    /// needs it back in normal order.
    fn prepare_matrix(self, a: &PolyMat) -> Vec<Vec<Poly>> {
        a.rows
            .iter()
            .map(|row| match self {
                DilithiumMultiplier::Ntt => row.polys.clone(),
                DilithiumMultiplier::Schoolbook => row
                    .polys
                    .iter()
                    .map(|p| {
                        let mut out = p.clone();
                        inverse_in_place(&mut out.coeffs, TwiddleTable::cached(ctx()));
                        out
                    })
                    .collect(),
            })
            .collect()
    }

    /// `Σ a[j]·b[j]` for prepared operands, returned in normal order.
    fn dot(self, a: &[Poly], b: &[Poly]) -> Poly {
        let c = ctx();
        let mut acc = [0u32; N];
        match self {
            DilithiumMultiplier::Ntt => {
                for (x, y) in a.iter().zip(b) {
                    pointwise_mul_acc(&mut acc, &x.coeffs, &y.coeffs, &c);
                }
                inverse_in_place(&mut acc, TwiddleTable::cached(c));
            }
            DilithiumMultiplier::Schoolbook => {
                for (x, y) in a.iter().zip(b) {
                    let prod = schoolbook_negacyclic(x, y, field());
                    for (s, p) in acc.iter_mut().zip(prod.coeffs) {
                        *s = c.add(*s, p);
                    }
                }
            }
        }
        Poly::from_coeffs(field(), acc)
    }

    fn mat_vec(self, a: &[Vec<Poly>], v: &[Poly]) -> Vec<Poly> {
        a.iter().map(|row| self.dot(row, v)).collect()
    }

    /// `c·v[i]` for every entry.
    fn scale(self, c: &Poly, v: &[Poly]) -> Vec<Poly> {
        v.iter().map(|p| self.dot(std::slice::from_ref(c), std::slice::from_ref(p))).collect()
    }
}

fn infinity_norm(p: &Poly) -> u32 {
    p.centered().iter().map(|c| c.unsigned_abs() as u32).max().unwrap_or(0)
}

/// True when every coefficient of every polynomial is below `bound` in
/// absolute value.
fn norm_below(v: &[Poly], bound: u32) -> bool {
    v.iter().all(|p| infinity_norm(p) < bound)
}

fn sub_all(a: &[Poly], b: &[Poly]) -> Result<Vec<Poly>, Error> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn add_all(a: &[Poly], b: &[Poly]) -> Result<Vec<Poly>, Error> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

/// First 384 bits of SHAKE-256.
pub fn crh(data: &[u8]) -> [u8; 48] {
    shake(HashMode::Shake256, &[data], 48).try_into().expect("48 bytes")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilithiumKeyPair {
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
}

/// Signature bytes plus the number of loop attempts it took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignOutput {
    pub signature: Vec<u8>,
    pub iterations: u32,
}

/// Why one attempt of the signing loop was thrown away.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    ZNorm,
    LowBits,
    CommitNorm,
    HintWeight,
}

#[derive(Clone, Debug)]
pub enum Attempt {
    Accepted(Signature),
    Rejected(Rejection),
}

/// Everything the loop needs, computed once per message.
#[derive(Clone, Debug)]
pub struct PreSign {
    mu: Vec<u8>,
    rhoprime: Vec<u8>,
    a: Vec<Vec<Poly>>,
    s1: Vec<Poly>,
    s2: Vec<Poly>,
    t0: Vec<Poly>,
}

impl PreSign {
    pub fn mu(&self) -> &[u8] {
        &self.mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dilithium {
    pub params: DilithiumParams,
    pub mul: DilithiumMultiplier,
}

impl Dilithium {
    pub fn new(level: DilithiumLevel, mul: DilithiumMultiplier) -> Self {
        Self {
            params: level.params(),
            mul,
        }
    }

    pub fn level(&self) -> DilithiumLevel {
        self.params.level
    }

    /// Deterministic key generation from the 32 bytes the reference draws.
    pub fn keygen_from_seed(&self, seed: &[u8; SEED_BYTES]) -> Result<DilithiumKeyPair, Error> {
        let p = &self.params;
        let buf = shake(HashMode::Shake256, &[seed], 2 * SEED_BYTES + CRH_BYTES);
        let rho: [u8; SEED_BYTES] = buf[..SEED_BYTES].try_into().expect("split");
        let rhoprime = &buf[SEED_BYTES..SEED_BYTES + CRH_BYTES];
        let key: [u8; SEED_BYTES] = buf[SEED_BYTES + CRH_BYTES..].try_into().expect("split");

        let a = self.mul.prepare_matrix(&expand_a(&rho, p)?);
        let (s1, s2) = expand_s(rhoprime, p)?;
        let t = add_all(&self.mul.mat_vec(&a, &self.mul.prepare_vec(&s1)), &s2.polys)?;

        let mut t1 = Vec::with_capacity(p.k);
        let mut t0 = Vec::with_capacity(p.k);
        for poly in &t {
            let mut hi = Poly::zero(field());
            let mut lo = [0i64; N];
            for (n, &c) in poly.coeffs.iter().enumerate() {
                let (r1, r0) = power2round(c);
                hi.coeffs[n] = r1;
                lo[n] = r0 as i64;
            }
            t1.push(hi);
            t0.push(Poly::from_signed(field(), &lo)?);
        }
        let pk = pack_pk(&rho, &PolyVec::new(t1)?)?;
        let tr: [u8; TR_BYTES] = shake(HashMode::Shake256, &[&pk], TR_BYTES).try_into().expect("split");
        let sk = SecretKey {
            rho,
            key,
            tr,
            s1,
            s2,
            t0: PolyVec::new(t0)?,
        }
        .pack(p)?;
        Ok(DilithiumKeyPair { pk, sk })
    }

    pub fn keygen(&self, rng: &mut impl RngCore) -> Result<DilithiumKeyPair, Error> {
        let mut seed = [0u8; SEED_BYTES];
        rng.fill_bytes(&mut seed);
        self.keygen_from_seed(&seed)
    }

    /// Key unpacking, message hashing and transform precomputation.
    pub fn presign(&self, sk: &[u8], msg: &[u8]) -> Result<PreSign, Error> {
        let p = &self.params;
        let key = SecretKey::unpack(sk, p)?;
        let mu = shake(HashMode::Shake256, &[&key.tr, msg], CRH_BYTES);
        let rhoprime = shake(HashMode::Shake256, &[&key.key, &mu], CRH_BYTES);
        Ok(PreSign {
            a: self.mul.prepare_matrix(&expand_a(&key.rho, p)?),
            s1: self.mul.prepare_vec(&key.s1),
            s2: self.mul.prepare_vec(&key.s2),
            t0: self.mul.prepare_vec(&key.t0),
            mu,
            rhoprime,
        })
    }

    /// One pass of the rejection loop with mask nonce `kappa`.
    pub fn sign_attempt(&self, pre: &PreSign, kappa: u16) -> Result<Attempt, Error> {
        let p = &self.params;
        let y = expand_mask(&pre.rhoprime, kappa, p)?;
        let w = self.mul.mat_vec(&pre.a, &self.mul.prepare_vec(&y));

        let mut w1 = Vec::with_capacity(p.k);
        let mut w0 = Vec::with_capacity(p.k);
        for poly in &w {
            let mut hi = Poly::zero(field());
            let mut lo = [0i64; N];
            for (n, &c) in poly.coeffs.iter().enumerate() {
                let (r1, r0) = decompose(c, p.gamma2);
                hi.coeffs[n] = r1;
                lo[n] = r0 as i64;
            }
            w1.push(hi);
            w0.push(Poly::from_signed(field(), &lo)?);
        }
        let w1 = PolyVec::new(w1)?;
        let c_tilde: [u8; SEED_BYTES] = shake(HashMode::Shake256, &[&pre.mu, &pack_w1(&w1, p.gamma2)?], SEED_BYTES)
            .try_into()
            .expect("split");
        let c = self.mul.prepare(&sample_in_ball(&c_tilde, p.tau)?);

        let z = add_all(&self.mul.scale(&c, &pre.s1), &y.polys)?;
        if !norm_below(&z, p.gamma1 - p.beta) {
            return Ok(Attempt::Rejected(Rejection::ZNorm));
        }
        let r0 = sub_all(&w0, &self.mul.scale(&c, &pre.s2))?;
        if !norm_below(&r0, p.gamma2 - p.beta) {
            return Ok(Attempt::Rejected(Rejection::LowBits));
        }
        let ct0 = self.mul.scale(&c, &pre.t0);
        if !norm_below(&ct0, p.gamma2) {
            return Ok(Attempt::Rejected(Rejection::CommitNorm));
        }
        let low = add_all(&r0, &ct0)?;
        let mut h = Vec::with_capacity(p.k);
        for (lp, hp) in low.iter().zip(&w1.polys) {
            let mut bits = Poly::zero(field());
            for (n, &l) in lp.centered().iter().enumerate() {
                bits.coeffs[n] = make_hint_low(l as i32, hp.coeffs[n], p.gamma2) as u32;
            }
            h.push(bits);
        }
        let h = PolyVec::new(h)?;
        if hint_weight(&h) > p.omega {
            return Ok(Attempt::Rejected(Rejection::HintWeight));
        }
        Ok(Attempt::Accepted(Signature {
            c_tilde,
            z: PolyVec::new(z)?,
            h,
        }))
    }

    /// Encodes an accepted attempt.
    pub fn postsign(&self, sig: &Signature) -> Result<Vec<u8>, Error> {
        sig.pack(&self.params)
    }

    pub fn sign(&self, sk: &[u8], msg: &[u8]) -> Result<SignOutput, Error> {
        let pre = self.presign(sk, msg)?;
        let mut kappa: u16 = 0;
        let mut iterations = 0u32;
        loop {
            iterations += 1;
            let attempt = self.sign_attempt(&pre, kappa)?;
            kappa = kappa.wrapping_add(1);
            if let Attempt::Accepted(sig) = attempt {
                return Ok(SignOutput {
                    signature: self.postsign(&sig)?,
                    iterations,
                });
            }
        }
    }

    /// Signed message: signature followed by the message.
    pub fn sign_message(&self, sk: &[u8], msg: &[u8]) -> Result<Vec<u8>, Error> {
        let mut sm = self.sign(sk, msg)?.signature;
        sm.extend_from_slice(msg);
        Ok(sm)
    }

    /// Accept or reject; malformed inputs are rejections.
    pub fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        self.verify_inner(pk, msg, sig).unwrap_or(false)
    }

    fn verify_inner(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> Result<bool, Error> {
        let p = &self.params;
        let (rho, t1) = unpack_pk(pk, p)?;
        let sig = Signature::unpack(sig, p)?;
        if !norm_below(&sig.z.polys, p.gamma1 - p.beta) {
            return Ok(false);
        }
        let tr = shake(HashMode::Shake256, &[pk], TR_BYTES);
        let mu = shake(HashMode::Shake256, &[&tr, msg], CRH_BYTES);
        let c = self.mul.prepare(&sample_in_ball(&sig.c_tilde, p.tau)?);

        let a = self.mul.prepare_matrix(&expand_a(&rho, p)?);
        let az = self.mul.mat_vec(&a, &self.mul.prepare_vec(&sig.z));
        let t1_shifted: Vec<Poly> = t1
            .polys
            .iter()
            .map(|t| Poly::from_coeffs(field(), t.coeffs.map(|v| v << D)))
            .collect();
        let ct1 = self.mul.scale(&c, &self.mul.prepare_vec(&PolyVec::new(t1_shifted)?));
        let r = sub_all(&az, &ct1)?;

        let mut w1 = Vec::with_capacity(p.k);
        for (rp, hp) in r.iter().zip(&sig.h.polys) {
            let mut hi = Poly::zero(field());
            for n in 0..N {
                hi.coeffs[n] = use_hint(hp.coeffs[n] != 0, rp.coeffs[n], p.gamma2);
            }
            w1.push(hi);
        }
        let expect = shake(HashMode::Shake256, &[&mu, &pack_w1(&PolyVec::new(w1)?, p.gamma2)?], SEED_BYTES);
        Ok(expect == sig.c_tilde)
    }

    /// Splits a signed message and returns the message when it verifies.
    pub fn open(&self, pk: &[u8], sm: &[u8]) -> Option<Vec<u8>> {
        let n = self.params.signature_bytes();
        if sm.len() < n {
            return None;
        }
        let (sig, msg) = sm.split_at(n);
        self.verify(pk, msg, sig).then(|| msg.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keccak::shake256;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crh_is_shake_prefix() {
        for msg in [&b""[..], b"abc", &[0x5a; 300]] {
            let h = crh(msg);
            assert_eq!(h.len(), 48);
            assert_eq!(h.to_vec(), shake256(msg, 48));
        }
    }

    #[test]
    fn sign_verify_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for lvl in DilithiumLevel::ALL {
            let d = Dilithium::new(lvl, DilithiumMultiplier::Ntt);
            let kp = d.keygen(&mut rng).unwrap();
            assert_eq!(kp.pk.len(), d.params.public_key_bytes());
            assert_eq!(kp.sk.len(), d.params.secret_key_bytes());
            for _ in 0..5 {
                let mut msg = vec![0u8; rng.gen_range(0..100)];
                rng.fill(&mut msg[..]);
                let out = d.sign(&kp.sk, &msg).unwrap();
                assert!(out.iterations >= 1);
                assert!(d.verify(&kp.pk, &msg, &out.signature));
                msg.push(1);
                assert!(!d.verify(&kp.pk, &msg, &out.signature));
            }
        }
    }

    #[test]
    fn corrupted_signature_rejected() {
        let d = Dilithium::new(DilithiumLevel::Dilithium2, DilithiumMultiplier::Ntt);
        let kp = d.keygen_from_seed(&[4u8; 32]).unwrap();
        let sig = d.sign(&kp.sk, b"hello").unwrap().signature;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let mut bad = sig.clone();
            let bit = rng.gen_range(0..bad.len() * 8);
            bad[bit / 8] ^= 1 << (bit % 8);
            assert!(!d.verify(&kp.pk, b"hello", &bad), "bit {bit}");
        }
        assert!(!d.verify(&kp.pk, b"hello", &sig[1..]));
        assert!(!d.verify(&kp.pk[1..], b"hello", &sig));
    }

    #[test]
    fn produced_signatures_satisfy_bounds() {
        for lvl in DilithiumLevel::ALL {
            let d = Dilithium::new(lvl, DilithiumMultiplier::Ntt);
            let kp = d.keygen_from_seed(&[lvl.number() as u8; 32]).unwrap();
            for m in 0..3u8 {
                let sig = d.sign(&kp.sk, &[m]).unwrap().signature;
                let s = Signature::unpack(&sig, &d.params).unwrap();
                assert!(norm_below(&s.z.polys, d.params.gamma1 - d.params.beta));
                assert!(hint_weight(&s.h) <= d.params.omega);
            }
        }
    }

    #[test]
    fn multiplier_independence() {
        for lvl in DilithiumLevel::ALL {
            let fast = Dilithium::new(lvl, DilithiumMultiplier::Ntt);
            let slow = Dilithium::new(lvl, DilithiumMultiplier::Schoolbook);
            let seed = [0x11 * lvl.number() as u8; 32];
            let kp = fast.keygen_from_seed(&seed).unwrap();
            assert_eq!(slow.keygen_from_seed(&seed).unwrap(), kp);
            let a = fast.sign(&kp.sk, b"same").unwrap();
            let b = slow.sign(&kp.sk, b"same").unwrap();
            assert_eq!(a, b);
            assert!(slow.verify(&kp.pk, b"same", &a.signature));
        }
    }

    #[test]
    fn open_splits_signed_message() {
        let d = Dilithium::new(DilithiumLevel::Dilithium3, DilithiumMultiplier::Ntt);
        let kp = d.keygen_from_seed(&[9u8; 32]).unwrap();
        let sm = d.sign_message(&kp.sk, b"payload").unwrap();
        assert_eq!(sm.len(), d.params.signature_bytes() + 7);
        assert_eq!(d.open(&kp.pk, &sm).unwrap(), b"payload");
        assert!(d.open(&kp.pk, &sm[..10]).is_none());
    }
}
