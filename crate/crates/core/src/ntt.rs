//! Negacyclic NTT over the pseudo-Mersenne primes.
//!
//! The forward transform uses Cooley-Tukey butterflies and leaves its output
//! in bit-reversed order. The inverse uses Gentleman-Sande butterflies that
//! halve both outputs, so no final scaling by `n^-1` is needed.

use std::sync::OnceLock;

use crate::poly::{Modulus, Poly, N};
use crate::{Error, PrimeCtx};

/// Number of butterfly stages for n = 256.
pub const STAGES: usize = 8;

/// Twiddle factors for one prime.
#[derive(Clone, Debug)]
pub struct TwiddleTable {
    ctx: PrimeCtx,
    psi: u32,
    /// `forward[k] = psi^bitrev8(k)`; entry 0 is never used.
    pub forward: [u32; N],
    /// `inverse[k] = forward[k]^-1`.
    pub inverse: [u32; N],
}

/// Butterfly and multiplication counters for one transform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransformStats {
    pub stages: usize,
    pub butterflies: usize,
    pub post_multiplications: usize,
}

fn bitrev8(k: usize) -> usize {
    (k as u8).reverse_bits() as usize
}

/// Smallest primitive 512th root of unity modulo `q`.
pub fn smallest_primitive_root(ctx: &PrimeCtx) -> u32 {
    let q = ctx.q();
    // psi^256 = -1 together with psi^512 = 1 pins the order to exactly 512.
    (2..q)
        .find(|&c| ctx.pow(c, 256) == q - 1)
        .expect("q = 1 mod 512 guarantees a primitive root")
}

impl TwiddleTable {
    pub fn new(ctx: PrimeCtx) -> Self {
        let psi = smallest_primitive_root(&ctx);
        let mut forward = [0u32; N];
        let mut inverse = [0u32; N];
        for k in 0..N {
            forward[k] = ctx.pow(psi, bitrev8(k) as u64);
            inverse[k] = ctx.inv(forward[k]);
        }
        Self {
            ctx,
            psi,
            forward,
            inverse,
        }
    }

    /// Shared table for one of the supported primes.
    pub fn cached(ctx: PrimeCtx) -> &'static TwiddleTable {
        static TABLES: [OnceLock<TwiddleTable>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = match ctx.bits() {
            23 => 0,
            24 => 1,
            _ => 2,
        };
        TABLES[slot].get_or_init(|| TwiddleTable::new(ctx))
    }

    pub fn ctx(&self) -> PrimeCtx {
        self.ctx
    }

    pub fn psi(&self) -> u32 {
        self.psi
    }
}

/// In-place forward transform of residues mod `q`.
pub fn forward_in_place(a: &mut [u32; N], t: &TwiddleTable) -> TransformStats {
    let ctx = &t.ctx;
    let mut stats = TransformStats::default();
    let mut k = 0;
    let mut len = N / 2;
    while len > 0 {
        let mut start = 0;
        while start < N {
            k += 1;
            let zeta = t.forward[k];
            for j in start..start + len {
                let tmp = ctx.mul(zeta, a[j + len]);
                a[j + len] = ctx.sub(a[j], tmp);
                a[j] = ctx.add(a[j], tmp);
                stats.butterflies += 1;
            }
            start += 2 * len;
        }
        stats.stages += 1;
        len >>= 1;
    }
    stats
}

/// In-place inverse transform; exact inverse of [`forward_in_place`].
pub fn inverse_in_place(a: &mut [u32; N], t: &TwiddleTable) -> TransformStats {
    let ctx = &t.ctx;
    let mut stats = TransformStats::default();
    let mut len = 1;
    while len < N {
        let base = N / (2 * len);
        for (g, start) in (0..N).step_by(2 * len).enumerate() {
            let zeta_inv = t.inverse[base + g];
            for j in start..start + len {
                let x = a[j];
                let y = a[j + len];
                a[j] = ctx.div2(ctx.add(x, y));
                a[j + len] = ctx.mul(zeta_inv, ctx.div2(ctx.sub(x, y)));
                stats.butterflies += 1;
            }
        }
        stats.stages += 1;
        len <<= 1;
    }
    stats
}

fn expect_prime(p: &Poly, ctx: PrimeCtx) -> Result<(), Error> {
    if p.modulus() != Modulus::Prime(ctx) {
        return Err(Error::ModulusMismatch {
            left: p.modulus().to_string(),
            right: Modulus::Prime(ctx).to_string(),
        });
    }
    Ok(())
}

/// Forward NTT of a polynomial over the table's prime.
pub fn ntt(p: &Poly, t: &TwiddleTable) -> Result<Poly, Error> {
    expect_prime(p, t.ctx)?;
    let mut out = p.clone();
    forward_in_place(&mut out.coeffs, t);
    Ok(out)
}

/// Inverse NTT of a polynomial in the engine's bit-reversed NTT order.
pub fn intt(p: &Poly, t: &TwiddleTable) -> Result<Poly, Error> {
    expect_prime(p, t.ctx)?;
    let mut out = p.clone();
    inverse_in_place(&mut out.coeffs, t);
    Ok(out)
}

/// `acc += a ∘ b` in the NTT domain.
pub fn pointwise_mul_acc(acc: &mut [u32; N], a: &[u32; N], b: &[u32; N], ctx: &PrimeCtx) {
    for k in 0..N {
        acc[k] = ctx.add(acc[k], ctx.mul(a[k], b[k]));
    }
}

/// Polynomial version of [`pointwise_mul_acc`].
pub fn pointwise_mul_acc_poly(acc: &Poly, a: &Poly, b: &Poly, ctx: PrimeCtx) -> Result<Poly, Error> {
    for p in [acc, a, b] {
        expect_prime(p, ctx)?;
    }
    let mut out = acc.clone();
    pointwise_mul_acc(&mut out.coeffs, &a.coeffs, &b.coeffs, &ctx);
    Ok(out)
}

/// Negacyclic product through the transform.
pub fn negacyclic_mul(a: &Poly, b: &Poly, ctx: PrimeCtx) -> Result<Poly, Error> {
    let t = TwiddleTable::cached(ctx);
    let fa = ntt(a, t)?;
    let fb = ntt(b, t)?;
    intt(&fa.pointwise_mul(&fb)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::schoolbook_negacyclic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all() -> [PrimeCtx; 3] {
        [PrimeCtx::q23(), PrimeCtx::q24(), PrimeCtx::q25()]
    }

    fn random(rng: &mut ChaCha8Rng, ctx: PrimeCtx) -> Poly {
        let mut p = Poly::zero(Modulus::Prime(ctx));
        for c in p.coeffs.iter_mut() {
            *c = rng.gen_range(0..ctx.q());
        }
        p
    }

    #[test]
    fn roots_have_order_512() {
        let expected = [1753, 74335, 60094];
        for (ctx, want) in all().into_iter().zip(expected) {
            let t = TwiddleTable::new(ctx);
            assert_eq!(t.psi(), want);
            assert_eq!(ctx.pow(t.psi(), 256), ctx.q() - 1);
            assert_eq!(ctx.pow(t.psi(), 512), 1);
            // No smaller candidate of full order exists.
            for c in 2..t.psi() {
                assert_ne!(ctx.pow(c, 256), ctx.q() - 1);
            }
        }
    }

    #[test]
    fn forward_entries_distinct_and_nonzero() {
        let t = TwiddleTable::new(PrimeCtx::q24());
        let mut seen = std::collections::HashSet::new();
        for &w in &t.forward {
            assert_ne!(w, 0);
            assert!(seen.insert(w));
        }
        for k in 0..N {
            assert_eq!(t.ctx().mul(t.forward[k], t.inverse[k]), 1);
        }
    }

    #[test]
    fn q23_table_matches_reference_zetas() {
        // The Dilithium reference stores zetas in Montgomery form (times 2^32).
        let ctx = PrimeCtx::q23();
        let t = TwiddleTable::new(ctx);
        let r_inv = ctx.inv(ctx.pow(2, 32));
        for (k, mont) in [(1, 25_847i64), (2, -2_608_894), (3, -518_909)] {
            assert_eq!(t.forward[k], ctx.mul(ctx.from_signed(mont), r_inv));
        }
        assert_eq!(t.forward[1], 4_808_194);
    }

    #[test]
    fn delta_maps_to_all_ones_and_back() {
        for ctx in all() {
            let t = TwiddleTable::cached(ctx);
            let m = Modulus::Prime(ctx);
            let f = ntt(&Poly::one(m), t).unwrap();
            assert!(f.coeffs.iter().all(|&c| c == 1));
            assert_eq!(intt(&f, t).unwrap(), Poly::one(m));
            assert_eq!(ntt(&Poly::zero(m), t).unwrap(), Poly::zero(m));
        }
    }

    #[test]
    fn stage_and_butterfly_counts() {
        let t = TwiddleTable::cached(PrimeCtx::q23());
        let mut a = [5u32; N];
        let f = forward_in_place(&mut a, t);
        let i = inverse_in_place(&mut a, t);
        assert_eq!(f, i);
        assert_eq!(f.stages, STAGES);
        assert_eq!(f.butterflies, STAGES * 128);
        assert_eq!(i.post_multiplications, 0);
        assert_eq!(a, [5u32; N]);
    }

    #[test]
    fn multiplication_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for ctx in all() {
            let m = Modulus::Prime(ctx);
            for _ in 0..20 {
                let a = random(&mut rng, ctx);
                let b = random(&mut rng, ctx);
                assert_eq!(negacyclic_mul(&a, &b, ctx).unwrap(), schoolbook_negacyclic(&a, &b, m));
            }
            let a = random(&mut rng, ctx);
            assert_eq!(negacyclic_mul(&a, &Poly::one(m), ctx).unwrap(), a);
        }
    }

    #[test]
    fn accumulation_in_ntt_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ctx = PrimeCtx::q25();
        let m = Modulus::Prime(ctx);
        let t = TwiddleTable::cached(ctx);
        let pairs: Vec<(Poly, Poly)> = (0..3).map(|_| (random(&mut rng, ctx), random(&mut rng, ctx))).collect();

        let mut acc = Poly::zero(m);
        let mut want = Poly::zero(m);
        for (a, b) in &pairs {
            acc = pointwise_mul_acc_poly(&acc, &ntt(a, t).unwrap(), &ntt(b, t).unwrap(), ctx).unwrap();
            want = want.add(&schoolbook_negacyclic(a, b, m)).unwrap();
        }
        assert_eq!(intt(&acc, t).unwrap(), want);

        let mut rev = Poly::zero(m);
        for (a, b) in pairs.iter().rev() {
            rev = pointwise_mul_acc_poly(&rev, &ntt(a, t).unwrap(), &ntt(b, t).unwrap(), ctx).unwrap();
        }
        assert_eq!(rev, acc);
    }

    #[test]
    fn rejects_foreign_modulus() {
        let t = TwiddleTable::cached(PrimeCtx::q23());
        assert!(ntt(&Poly::zero(Modulus::SABER_Q), t).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_and_linearity(seed in proptest::prelude::any::<u64>(), which in 0usize..3) {
            let ctx = all()[which];
            let t = TwiddleTable::cached(ctx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random(&mut rng, ctx);
            let b = random(&mut rng, ctx);
            proptest::prop_assert_eq!(intt(&ntt(&a, t).unwrap(), t).unwrap(), a.clone());
            let lhs = ntt(&a.add(&b).unwrap(), t).unwrap();
            let rhs = ntt(&a, t).unwrap().add(&ntt(&b, t).unwrap()).unwrap();
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
