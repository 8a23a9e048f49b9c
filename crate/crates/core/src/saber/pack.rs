//! Saber byte codecs.

pub use crate::poly::{pack_bits, unpack_bits};
use crate::poly::{Modulus, Poly, PolyVec, N};
use crate::Error;

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

/// Serializes a polynomial vector at `bits` per coefficient.
pub fn polvec_to_bytes(v: &PolyVec, bits: u32) -> Vec<u8> {
    v.polys.iter().flat_map(|p| pack_bits(&p.coeffs, bits)).collect()
}

/// Deserializes `l` polynomials packed at the width of `modulus`.
pub fn bs2polvec(bytes: &[u8], l: usize, modulus: Modulus) -> Result<PolyVec, Error> {
    let bits = modulus.bits();
    let per = N * bits as usize / 8;
    expect_len("packed polynomial vector", bytes, l * per)?;
    let polys = bytes
        .chunks_exact(per)
        .map(|chunk| {
            let mut p = Poly::zero(modulus);
            p.coeffs.copy_from_slice(&unpack_bits(chunk, bits, N));
            p
        })
        .collect();
    PolyVec::new(polys)
}

/// Message bits, least significant bit of each byte first.
pub fn msg_to_poly(msg: &[u8; 32]) -> [u32; N] {
    let mut out = [0u32; N];
    for (i, o) in out.iter_mut().enumerate() {
        *o = ((msg[i / 8] >> (i % 8)) & 1) as u32;
    }
    out
}

pub fn poly_to_msg(bits: &[u32; N]) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= ((b & 1) as u8) << (i % 8);
    }
    out
}

/// Constant-time style comparison; returns 1 when the inputs differ.
pub fn verify_ct(a: &[u8], b: &[u8]) -> Result<u8, Error> {
    expect_len("verify operand", b, a.len())?;
    let mut acc = 0u8;
    for (x, y) in a.iter().zip(b) {
        acc |= x ^ y;
    }
    Ok(((acc as u16).wrapping_neg() >> 15) as u8)
}

/// Replaces `dst` with `src` when `flag` is 1.
pub fn cmov(dst: &mut [u8], src: &[u8], flag: u8) -> Result<(), Error> {
    expect_len("cmov source", src, dst.len())?;
    let m = flag.wrapping_neg();
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= m & (*d ^ s);
    }
    Ok(())
}

/// Plain copy with a length check.
pub fn copy(dst: &mut [u8], src: &[u8]) -> Result<(), Error> {
    expect_len("copy source", src, dst.len())?;
    dst.copy_from_slice(src);
    Ok(())
}
