//! Matrix-vector products over `Z_{2^13}` computed in a prime field.
//!
//! Both operands are mapped to centered representatives and lifted into the
//! prime, multiplied there with the shared NTT, and the centered result is
//! reduced back to the power-of-two modulus. With the 25-bit prime no
//! coefficient of a Saber product can wrap, so the result is always exact.

use crate::ntt::{forward_in_place, inverse_in_place, pointwise_mul_acc, TwiddleTable};
use crate::poly::{negacyclic_exact, Modulus, Poly, PolyMat, PolyVec, N};
use crate::{Error, PrimeCtx};

/// How polynomial products are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaberMultiplier {
    /// Through the NTT over the given prime.
    Ntt(PrimeCtx),
    /// Exact schoolbook product, used as a reference.
    Schoolbook,
}

impl Default for SaberMultiplier {
    fn default() -> Self {
        SaberMultiplier::Ntt(PrimeCtx::q25())
    }
}

/// Centered representatives of `p` lifted into `[0, q)`.
pub fn lift_centered(p: &Poly, ctx: &PrimeCtx) -> [u32; N] {
    let mut out = [0u32; N];
    for (o, v) in out.iter_mut().zip(p.centered()) {
        *o = ctx.from_signed(v);
    }
    out
}

/// `Σ publics[k] · secrets[k]` reduced into `out`.
pub fn mul_acc(publics: &[&Poly], secrets: &[&Poly], mul: SaberMultiplier, out: Modulus) -> Result<Poly, Error> {
    if publics.len() != secrets.len() {
        return Err(Error::DimensionMismatch {
            expected: publics.len(),
            got: secrets.len(),
        });
    }
    match mul {
        SaberMultiplier::Ntt(ctx) => {
            let t = TwiddleTable::cached(ctx);
            let hat: Vec<[u32; N]> = secrets
                .iter()
                .map(|s| {
                    let mut v = lift_centered(s, &ctx);
                    forward_in_place(&mut v, t);
                    v
                })
                .collect();
            Ok(mul_acc_hat(publics, &hat, &ctx, out))
        }
        SaberMultiplier::Schoolbook => {
            let mut acc = [0i128; N];
            for (a, s) in publics.iter().zip(secrets) {
                let prod = negacyclic_exact(&a.centered(), &s.centered());
                for (x, y) in acc.iter_mut().zip(prod) {
                    *x += y;
                }
            }
            let mut p = Poly::zero(out);
            for (c, v) in p.coeffs.iter_mut().zip(acc) {
                *c = out.reduce_i128(v);
            }
            Ok(p)
        }
    }
}

/// Row accumulation against secrets already in the NTT domain.
fn mul_acc_hat(publics: &[&Poly], secrets_hat: &[[u32; N]], ctx: &PrimeCtx, out: Modulus) -> Poly {
    let t = TwiddleTable::cached(*ctx);
    let mut acc = [0u32; N];
    for (a, s_hat) in publics.iter().zip(secrets_hat) {
        let mut a_hat = lift_centered(a, ctx);
        forward_in_place(&mut a_hat, t);
        pointwise_mul_acc(&mut acc, &a_hat, s_hat, ctx);
    }
    inverse_in_place(&mut acc, t);
    let mut p = Poly::zero(out);
    for (c, &r) in p.coeffs.iter_mut().zip(&acc) {
        *c = out.reduce_i64(ctx.centered(r));
    }
    p
}

/// `A·s` (or `Aᵀ·s` when `transpose`) over `2^13`.
pub fn mv_mul(a: &PolyMat, s: &PolyVec, mul: SaberMultiplier, transpose: bool) -> Result<PolyVec, Error> {
    let l = s.len();
    if a.rows() != l || a.cols() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: a.rows(),
        });
    }
    let secrets: Vec<&Poly> = s.polys.iter().collect();
    let out = Modulus::SABER_Q;
    let rows = match mul {
        SaberMultiplier::Ntt(ctx) => {
            let t = TwiddleTable::cached(ctx);
            let hat: Vec<[u32; N]> = secrets
                .iter()
                .map(|p| {
                    let mut v = lift_centered(p, &ctx);
                    forward_in_place(&mut v, t);
                    v
                })
                .collect();
            (0..l)
                .map(|i| {
                    let row: Vec<&Poly> = (0..l).map(|j| if transpose { a.get(j, i) } else { a.get(i, j) }).collect();
                    mul_acc_hat(&row, &hat, &ctx, out)
                })
                .collect()
        }
        SaberMultiplier::Schoolbook => (0..l)
            .map(|i| {
                let row: Vec<&Poly> = (0..l).map(|j| if transpose { a.get(j, i) } else { a.get(i, j) }).collect();
                mul_acc(&row, &secrets, mul, out)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    PolyVec::new(rows)
}

/// NTT-backed `A·s` with an explicit prime.
pub fn mv_mul_ntt(a: &PolyMat, s: &PolyVec, prime: PrimeCtx, transpose: bool) -> Result<PolyVec, Error> {
    mv_mul(a, s, SaberMultiplier::Ntt(prime), transpose)
}

/// `Σ b[i]·s[i]`, reduced modulo the modulus of `b`.
pub fn inner_prod(b: &PolyVec, s: &PolyVec, mul: SaberMultiplier) -> Result<Poly, Error> {
    let out = b.polys.first().map_or(Modulus::SABER_P, |p| p.modulus());
    let bs: Vec<&Poly> = b.polys.iter().collect();
    let ss: Vec<&Poly> = s.polys.iter().collect();
    mul_acc(&bs, &ss, mul, out)
}
