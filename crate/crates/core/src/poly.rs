//! Degree-256 polynomials over `Z_m[x]/(x^256 + 1)` with `m` either a power
//! of two (Saber) or one of the NTT primes.

use std::fmt;

use crate::{Error, PrimeCtx};

/// Ring dimension.
pub const N: usize = 256;

/// The coefficient ring of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modulus {
    /// `2^bits`
    PowerOfTwo(u32),
    Prime(PrimeCtx),
}

impl Modulus {
    pub const SABER_Q: Modulus = Modulus::PowerOfTwo(13);
    pub const SABER_P: Modulus = Modulus::PowerOfTwo(10);

    pub fn value(&self) -> u64 {
        match self {
            Modulus::PowerOfTwo(bits) => 1u64 << bits,
            Modulus::Prime(ctx) => ctx.q() as u64,
        }
    }

    /// Number of bits needed for a coefficient.
    pub fn bits(&self) -> u32 {
        match self {
            Modulus::PowerOfTwo(bits) => *bits,
            Modulus::Prime(ctx) => ctx.bits(),
        }
    }

    /// Bytes per coefficient in the hex serialization.
    pub fn byte_width(&self) -> usize {
        self.bits().div_ceil(8) as usize
    }

    /// Reduces an exact signed integer into `[0, m)`.
    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u32 {
        v.rem_euclid(self.value() as i128) as u32
    }

    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u32 {
        match self {
            Modulus::PowerOfTwo(bits) => (v as u64 & ((1u64 << bits) - 1)) as u32,
            Modulus::Prime(ctx) => ctx.from_signed(v),
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::PowerOfTwo(bits) => write!(f, "2^{bits}"),
            Modulus::Prime(ctx) => write!(f, "q{}={}", ctx.bits(), ctx.q()),
        }
    }
}

/// A polynomial with 256 unsigned coefficients in `[0, m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    pub coeffs: [u32; N],
    modulus: Modulus,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({:?}..)", self.modulus, &self.coeffs[..8])
    }
}

impl Poly {
    pub fn zero(modulus: Modulus) -> Self {
        Self {
            coeffs: [0; N],
            modulus,
        }
    }

    /// The unit polynomial `δ_0`.
    pub fn one(modulus: Modulus) -> Self {
        let mut p = Self::zero(modulus);
        p.coeffs[0] = 1;
        p
    }

    /// `x^k` for `k < 256`.
    pub fn monomial(modulus: Modulus, k: usize) -> Self {
        let mut p = Self::zero(modulus);
        p.coeffs[k] = 1;
        p
    }

    /// Builds a polynomial, reducing every coefficient into range.
    pub fn from_coeffs(modulus: Modulus, coeffs: [u32; N]) -> Self {
        let m = modulus.value();
        let mut p = Self { coeffs, modulus };
        for c in p.coeffs.iter_mut() {
            *c = (*c as u64 % m) as u32;
        }
        p
    }

    /// Builds a polynomial from signed values, mapping each to `[0, m)`.
    pub fn from_signed(modulus: Modulus, values: &[i64]) -> Result<Self, Error> {
        if values.len() != N {
            return Err(Error::DimensionMismatch {
                expected: N,
                got: values.len(),
            });
        }
        let mut p = Self::zero(modulus);
        for (c, &v) in p.coeffs.iter_mut().zip(values) {
            *c = modulus.reduce_i64(v);
        }
        Ok(p)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Reinterprets the coefficients under another modulus, reducing them.
    pub fn with_modulus(&self, modulus: Modulus) -> Self {
        Self::from_coeffs(modulus, self.coeffs)
    }

    /// Centered representatives: `c >= m/2` maps to `c - m`.
    pub fn centered(&self) -> [i64; N] {
        let m = self.modulus.value() as i64;
        let mut out = [0i64; N];
        for (o, &c) in out.iter_mut().zip(&self.coeffs) {
            let c = c as i64;
            *o = if c >= (m + 1) / 2 { c - m } else { c };
        }
        out
    }

    fn check(&self, other: &Poly) -> Result<(), Error> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.to_string(),
                right: other.modulus.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, Error> {
        self.check(other)?;
        let m = self.modulus.value();
        let mut out = self.clone();
        for (o, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = ((*o as u64 + b as u64) % m) as u32;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, Error> {
        self.check(other)?;
        let m = self.modulus.value();
        let mut out = self.clone();
        for (o, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = ((*o as u64 + m - b as u64) % m) as u32;
        }
        Ok(out)
    }

    pub fn pointwise_mul(&self, other: &Poly) -> Result<Poly, Error> {
        self.check(other)?;
        let mut out = self.clone();
        match self.modulus {
            Modulus::Prime(ctx) => {
                for (o, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
                    *o = ctx.mul(*o, b);
                }
            }
            Modulus::PowerOfTwo(bits) => {
                let mask = (1u64 << bits) - 1;
                for (o, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
                    *o = ((*o as u64 * b as u64) & mask) as u32;
                }
            }
        }
        Ok(out)
    }

    /// Little-endian hex, `byte_width` bytes per coefficient.
    pub fn to_hex(&self) -> String {
        let w = self.modulus.byte_width();
        let mut bytes = Vec::with_capacity(N * w);
        for &c in &self.coeffs {
            bytes.extend_from_slice(&c.to_le_bytes()[..w]);
        }
        hex::encode(bytes)
    }

    pub fn from_hex(modulus: Modulus, s: &str) -> Result<Poly, Error> {
        let bytes = hex::decode(s.trim())?;
        let w = modulus.byte_width();
        if bytes.len() != N * w {
            return Err(Error::InvalidLength {
                what: "polynomial hex",
                expected: N * w,
                got: bytes.len(),
            });
        }
        let mut p = Poly::zero(modulus);
        for (c, chunk) in p.coeffs.iter_mut().zip(bytes.chunks_exact(w)) {
            let mut buf = [0u8; 4];
            buf[..w].copy_from_slice(chunk);
            let v = u32::from_le_bytes(buf);
            if v as u64 >= modulus.value() {
                return Err(Error::OutOfRange {
                    what: "polynomial hex",
                    value: v as i64,
                });
            }
            *c = v;
        }
        Ok(p)
    }
}

/// Packs the low `width` bits of every value, least significant bit first.
pub fn pack_bits(values: &[u32], width: u32) -> Vec<u8> {
    let mut out = vec![0u8; (values.len() * width as usize).div_ceil(8)];
    let mut pos = 0usize;
    for &v in values {
        for b in 0..width {
            if (v >> b) & 1 == 1 {
                out[pos / 8] |= 1 << (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

/// Inverse of [`pack_bits`].
pub fn unpack_bits(bytes: &[u8], width: u32, count: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    for _ in 0..count {
        let mut v = 0u32;
        for b in 0..width {
            v |= (((bytes[pos / 8] >> (pos % 8)) & 1) as u32) << b;
            pos += 1;
        }
        out.push(v);
    }
    out
}

/// Maps a 13-bit coefficient to `[-4096, 4095]`.
#[inline]
pub fn remap_centered_13(c: u32) -> i32 {
    let c = (c & 0x1fff) as i32;
    if c >= 4096 {
        c - 8192
    } else {
        c
    }
}

/// Exact negacyclic product of two signed coefficient vectors.
pub fn negacyclic_exact(a: &[i64; N], b: &[i64; N]) -> [i128; N] {
    let mut acc = [0i128; N];
    for i in 0..N {
        if a[i] == 0 {
            continue;
        }
        let ai = a[i] as i128;
        for j in 0..N {
            let prod = ai * b[j] as i128;
            let k = i + j;
            if k < N {
                acc[k] += prod;
            } else {
                acc[k - N] -= prod;
            }
        }
    }
    acc
}

/// Schoolbook negacyclic multiplication with exact wide accumulation,
/// reduced modulo `modulus` only at the end.
pub fn schoolbook_negacyclic(a: &Poly, b: &Poly, modulus: Modulus) -> Poly {
    let mut ai = [0i64; N];
    let mut bi = [0i64; N];
    for k in 0..N {
        ai[k] = a.coeffs[k] as i64;
        bi[k] = b.coeffs[k] as i64;
    }
    let acc = negacyclic_exact(&ai, &bi);
    let mut out = Poly::zero(modulus);
    for (o, v) in out.coeffs.iter_mut().zip(acc) {
        *o = modulus.reduce_i128(v);
    }
    out
}

/// A vector of polynomials sharing one modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVec {
    pub polys: Vec<Poly>,
}

impl PolyVec {
    pub fn zero(modulus: Modulus, len: usize) -> Self {
        Self {
            polys: vec![Poly::zero(modulus); len],
        }
    }

    pub fn new(polys: Vec<Poly>) -> Result<Self, Error> {
        if let Some(first) = polys.first() {
            for p in &polys[1..] {
                first.check(p)?;
            }
        }
        Ok(Self { polys })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn add(&self, other: &PolyVec) -> Result<PolyVec, Error> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let polys = self
            .polys
            .iter()
            .zip(&other.polys)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(PolyVec { polys })
    }
}

/// A rectangular `rows × cols` grid of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMat {
    pub rows: Vec<PolyVec>,
}

impl PolyMat {
    pub fn new(rows: Vec<PolyVec>) -> Result<Self, Error> {
        if let Some(first) = rows.first() {
            for r in &rows[1..] {
                if r.len() != first.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.len(),
                        got: r.len(),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i].polys[j]
    }
}
