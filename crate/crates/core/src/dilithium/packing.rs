//! Bit layouts of keys and signatures.

use super::params::{DilithiumParams, Q, SEED_BYTES, T0_BYTES, T1_BYTES, TR_BYTES};
use crate::poly::{pack_bits, unpack_bits, Modulus, Poly, PolyVec, N};
use crate::{Error, PrimeCtx};

/// Which polynomial codec to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackKind {
    /// High part of `t`, 10 bits.
    T1,
    /// Low part of `t`, 13 bits.
    T0,
    /// Secret coefficient in `[-η, η]`.
    Eta(u32),
    /// Masked response in `(-γ1, γ1]`.
    Z(u32),
    /// High bits of `w` for the given `γ2`.
    W1(u32),
}

impl PackKind {
    pub fn bits(self) -> u32 {
        match self {
            PackKind::T1 => 10,
            PackKind::T0 => 13,
            PackKind::Eta(2) => 3,
            PackKind::Eta(_) => 4,
            PackKind::Z(g1) if g1 == 1 << 17 => 18,
            PackKind::Z(_) => 20,
            PackKind::W1(g2) if g2 == (Q - 1) / 88 => 6,
            PackKind::W1(_) => 4,
        }
    }

    pub fn bytes(self) -> usize {
        N * self.bits() as usize / 8
    }

    // Inclusive range of the signed value that gets encoded.
    fn range(self) -> (i64, i64) {
        match self {
            PackKind::T1 => (0, 1023),
            PackKind::T0 => (-4095, 4096),
            PackKind::Eta(e) => (-(e as i64), e as i64),
            PackKind::Z(g1) => (-(g1 as i64) + 1, g1 as i64),
            PackKind::W1(g2) => (0, ((Q - 1) / (2 * g2)) as i64 - 1),
        }
    }

    fn encode(self, v: i64) -> u32 {
        match self {
            PackKind::T1 | PackKind::W1(_) => v as u32,
            PackKind::T0 => (4096 - v) as u32,
            PackKind::Eta(e) => (e as i64 - v) as u32,
            PackKind::Z(g1) => (g1 as i64 - v) as u32,
        }
    }

    fn decode(self, u: u32) -> i64 {
        match self {
            PackKind::T1 | PackKind::W1(_) => u as i64,
            PackKind::T0 => 4096 - u as i64,
            PackKind::Eta(e) => e as i64 - u as i64,
            PackKind::Z(g1) => g1 as i64 - u as i64,
        }
    }
}

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

/// Signed view of a coefficient: `T1` and `W1` are read as plain residues,
/// everything else as centered residues.
fn signed(kind: PackKind, p: &Poly) -> [i64; N] {
    match kind {
        PackKind::T1 | PackKind::W1(_) => p.coeffs.map(|c| c as i64),
        _ => p.centered(),
    }
}

pub fn pack_poly(kind: PackKind, p: &Poly) -> Result<Vec<u8>, Error> {
    let (lo, hi) = kind.range();
    let vals = signed(kind, p);
    let mut enc = [0u32; N];
    for (e, &v) in enc.iter_mut().zip(vals.iter()) {
        if v < lo || v > hi {
            return Err(Error::OutOfRange {
                what: "packed coefficient",
                value: v,
            });
        }
        *e = kind.encode(v);
    }
    Ok(pack_bits(&enc, kind.bits()))
}

/// Decodes one polynomial. Like the reference, the secret-key codecs do not
/// range-check what they read.
pub fn unpack_poly(kind: PackKind, bytes: &[u8]) -> Result<Poly, Error> {
    expect_len("packed polynomial", bytes, kind.bytes())?;
    let raw = unpack_bits(bytes, kind.bits(), N);
    let vals: Vec<i64> = raw.into_iter().map(|u| kind.decode(u)).collect();
    Poly::from_signed(field(), &vals)
}

fn pack_vec(kind: PackKind, v: &PolyVec, out: &mut Vec<u8>) -> Result<(), Error> {
    for p in &v.polys {
        out.extend(pack_poly(kind, p)?);
    }
    Ok(())
}

fn unpack_vec(kind: PackKind, bytes: &[u8], count: usize) -> Result<PolyVec, Error> {
    expect_len("packed vector", bytes, count * kind.bytes())?;
    let polys = bytes
        .chunks(kind.bytes())
        .map(|c| unpack_poly(kind, c))
        .collect::<Result<Vec<_>, _>>()?;
    PolyVec::new(polys)
}

/// Hint vector as index lists followed by running counts.
pub fn pack_hint(h: &PolyVec, omega: usize) -> Result<Vec<u8>, Error> {
    let mut out = vec![0u8; omega + h.len()];
    let mut k = 0usize;
    for (i, p) in h.polys.iter().enumerate() {
        for (j, &c) in p.coeffs.iter().enumerate() {
            if c != 0 {
                if k == omega {
                    return Err(Error::OutOfRange {
                        what: "hint weight",
                        value: (k + 1) as i64,
                    });
                }
                out[k] = j as u8;
                k += 1;
            }
        }
        out[omega + i] = k as u8;
    }
    Ok(out)
}

/// Strict decoding: counts must be monotone and bounded, indices strictly
/// increasing within a polynomial, and unused slots zero.
pub fn unpack_hint(bytes: &[u8], k: usize, omega: usize) -> Result<PolyVec, Error> {
    expect_len("hint", bytes, omega + k)?;
    let mut polys = Vec::with_capacity(k);
    let mut start = 0usize;
    for i in 0..k {
        let end = bytes[omega + i] as usize;
        if end < start || end > omega {
            return Err(Error::Malformed("hint count out of order".into()));
        }
        let mut p = Poly::zero(field());
        for j in start..end {
            if j > start && bytes[j] <= bytes[j - 1] {
                return Err(Error::Malformed("hint indices not increasing".into()));
            }
            p.coeffs[bytes[j] as usize] = 1;
        }
        polys.push(p);
        start = end;
    }
    if bytes[start..omega].iter().any(|&b| b != 0) {
        return Err(Error::Malformed("nonzero padding in hint".into()));
    }
    PolyVec::new(polys)
}

pub fn hint_weight(h: &PolyVec) -> usize {
    h.polys
        .iter()
        .map(|p| p.coeffs.iter().filter(|&&c| c != 0).count())
        .sum()
}

pub fn pack_w1(w1: &PolyVec, gamma2: u32) -> Result<Vec<u8>, Error> {
    let mut out = Vec::new();
    pack_vec(PackKind::W1(gamma2), w1, &mut out)?;
    Ok(out)
}

pub fn pack_pk(rho: &[u8; SEED_BYTES], t1: &PolyVec) -> Result<Vec<u8>, Error> {
    let mut out = rho.to_vec();
    pack_vec(PackKind::T1, t1, &mut out)?;
    Ok(out)
}

pub fn unpack_pk(pk: &[u8], params: &DilithiumParams) -> Result<([u8; SEED_BYTES], PolyVec), Error> {
    expect_len("public key", pk, params.public_key_bytes())?;
    let rho = pk[..SEED_BYTES].try_into().expect("length checked");
    let t1 = unpack_vec(PackKind::T1, &pk[SEED_BYTES..], params.k)?;
    debug_assert_eq!(pk.len() - SEED_BYTES, params.k * T1_BYTES);
    Ok((rho, t1))
}

/// Unpacked secret key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub rho: [u8; SEED_BYTES],
    pub key: [u8; SEED_BYTES],
    pub tr: [u8; TR_BYTES],
    pub s1: PolyVec,
    pub s2: PolyVec,
    pub t0: PolyVec,
}

impl SecretKey {
    pub fn pack(&self, params: &DilithiumParams) -> Result<Vec<u8>, Error> {
        let mut out = Vec::with_capacity(params.secret_key_bytes());
        out.extend_from_slice(&self.rho);
        out.extend_from_slice(&self.key);
        out.extend_from_slice(&self.tr);
        let eta = PackKind::Eta(params.eta);
        pack_vec(eta, &self.s1, &mut out)?;
        pack_vec(eta, &self.s2, &mut out)?;
        pack_vec(PackKind::T0, &self.t0, &mut out)?;
        Ok(out)
    }

    pub fn unpack(sk: &[u8], params: &DilithiumParams) -> Result<Self, Error> {
        expect_len("secret key", sk, params.secret_key_bytes())?;
        let (rho, rest) = sk.split_at(SEED_BYTES);
        let (key, rest) = rest.split_at(SEED_BYTES);
        let (tr, rest) = rest.split_at(TR_BYTES);
        let eta = PackKind::Eta(params.eta);
        let (s1, rest) = rest.split_at(params.l * eta.bytes());
        let (s2, t0) = rest.split_at(params.k * eta.bytes());
        debug_assert_eq!(t0.len(), params.k * T0_BYTES);
        Ok(SecretKey {
            rho: rho.try_into().expect("split"),
            key: key.try_into().expect("split"),
            tr: tr.try_into().expect("split"),
            s1: unpack_vec(eta, s1, params.l)?,
            s2: unpack_vec(eta, s2, params.k)?,
            t0: unpack_vec(PackKind::T0, t0, params.k)?,
        })
    }
}

/// Unpacked signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub c_tilde: [u8; SEED_BYTES],
    pub z: PolyVec,
    pub h: PolyVec,
}

impl Signature {
    pub fn pack(&self, params: &DilithiumParams) -> Result<Vec<u8>, Error> {
        let mut out = Vec::with_capacity(params.signature_bytes());
        out.extend_from_slice(&self.c_tilde);
        pack_vec(PackKind::Z(params.gamma1), &self.z, &mut out)?;
        out.extend(pack_hint(&self.h, params.omega)?);
        Ok(out)
    }

    pub fn unpack(sig: &[u8], params: &DilithiumParams) -> Result<Self, Error> {
        expect_len("signature", sig, params.signature_bytes())?;
        let (c, rest) = sig.split_at(SEED_BYTES);
        let (z, h) = rest.split_at(params.l * params.z_bytes());
        Ok(Signature {
            c_tilde: c.try_into().expect("split"),
            z: unpack_vec(PackKind::Z(params.gamma1), z, params.l)?,
            h: unpack_hint(h, params.k, params.omega)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilithium::DilithiumLevel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const G88: u32 = (Q - 1) / 88;
    const G32: u32 = (Q - 1) / 32;

    fn kinds() -> Vec<PackKind> {
        vec![
            PackKind::T1,
            PackKind::T0,
            PackKind::Eta(2),
            PackKind::Eta(4),
            PackKind::Z(1 << 17),
            PackKind::Z(1 << 19),
            PackKind::W1(G88),
            PackKind::W1(G32),
        ]
    }

    fn random_poly(kind: PackKind, rng: &mut ChaCha8Rng) -> Poly {
        let (lo, hi) = kind.range();
        let vals: Vec<i64> = (0..N).map(|_| rng.gen_range(lo..=hi)).collect();
        Poly::from_signed(field(), &vals).unwrap()
    }

    #[test]
    fn round_trip_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in kinds() {
            for _ in 0..50 {
                let p = random_poly(kind, &mut rng);
                let b = pack_poly(kind, &p).unwrap();
                assert_eq!(b.len(), kind.bytes());
                assert_eq!(unpack_poly(kind, &b).unwrap(), p, "{kind:?}");
            }
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(PackKind::T1.bytes(), 320);
        assert_eq!(PackKind::T0.bytes(), 416);
        assert_eq!(PackKind::Eta(2).bytes(), 96);
        assert_eq!(PackKind::Eta(4).bytes(), 128);
        assert_eq!(PackKind::Z(1 << 17).bytes(), 576);
        assert_eq!(PackKind::Z(1 << 19).bytes(), 640);
        assert_eq!(PackKind::W1(G88).bytes(), 192);
        assert_eq!(PackKind::W1(G32).bytes(), 128);
    }

    #[test]
    fn pack_rejects_out_of_range() {
        let mut p = Poly::zero(field());
        p.coeffs[0] = 3;
        assert!(pack_poly(PackKind::Eta(2), &p).is_err());
        p.coeffs[0] = 1024;
        assert!(pack_poly(PackKind::T1, &p).is_err());
        p.coeffs[0] = 16;
        assert!(pack_poly(PackKind::W1(G32), &p).is_err());
        assert!(unpack_poly(PackKind::T1, &[0u8; 319]).is_err());
    }

    #[test]
    fn fixed_layouts() {
        // Hand-derived from the reference bit layouts.
        let mut p = Poly::zero(field());
        p.coeffs[0] = 1023;
        p.coeffs[1] = 1;
        assert_eq!(&pack_poly(PackKind::T1, &p).unwrap()[..3], &[0xff, 0x07, 0x00]);
        let mut v = [0i64; N];
        v[0] = 4096;
        v[1] = -4095;
        let t0 = Poly::from_signed(field(), &v).unwrap();
        // 4096 - 4096 = 0 and 4096 + 4095 = 0x1fff in the next 13 bits.
        assert_eq!(&pack_poly(PackKind::T0, &t0).unwrap()[..4], &[0x00, 0xe0, 0xff, 0x03]);
        v = [0i64; N];
        v[0] = -2;
        v[1] = 2;
        let e = Poly::from_signed(field(), &v).unwrap();
        // 2 - (-2) = 4, then 0, then 2 for every zero coefficient.
        assert_eq!(&pack_poly(PackKind::Eta(2), &e).unwrap()[..2], &[0x84, 0x24]);
    }

    #[test]
    fn hint_codec() {
        let params = DilithiumLevel::Dilithium3.params();
        let mut polys = vec![Poly::zero(field()); params.k];
        polys[0].coeffs[3] = 1;
        polys[0].coeffs[200] = 1;
        polys[2].coeffs[0] = 1;
        let h = PolyVec::new(polys).unwrap();
        let b = pack_hint(&h, params.omega).unwrap();
        assert_eq!(&b[..3], &[3, 200, 0]);
        assert_eq!(&b[params.omega..], &[2, 2, 3, 3, 3, 3]);
        assert_eq!(unpack_hint(&b, params.k, params.omega).unwrap(), h);
        assert_eq!(hint_weight(&h), 3);
    }

    #[test]
    fn hint_rejects_malformed() {
        let (k, omega) = (6, 55);
        let mut b = vec![0u8; omega + k];
        b[0] = 5;
        b[1] = 5;
        b[omega..].copy_from_slice(&[2, 2, 2, 2, 2, 2]);
        assert!(unpack_hint(&b, k, omega).is_err());
        b[1] = 6;
        assert!(unpack_hint(&b, k, omega).is_ok());
        b[10] = 1;
        assert!(unpack_hint(&b, k, omega).is_err());
        b[10] = 0;
        b[omega + 1] = 1;
        assert!(unpack_hint(&b, k, omega).is_err());
        b[omega + 1] = 2;
        b[omega + 5] = 56;
        assert!(unpack_hint(&b, k, omega).is_err());
    }

    #[test]
    fn hint_weight_limit() {
        let mut p = Poly::zero(field());
        for c in p.coeffs.iter_mut().take(56) {
            *c = 1;
        }
        let h = PolyVec::new(vec![p]).unwrap();
        assert!(pack_hint(&h, 55).is_err());
        assert!(pack_hint(&h, 56).is_ok());
    }
}
