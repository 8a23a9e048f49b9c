//! Arithmetic modulo the pseudo-Mersenne primes `q = 2^x - 2^y + 1`.
//!
//! All three supported moduli share the same shape, so a single reduction
//! routine covers them: the high part of a product is folded back with
//! `2^x ≡ 2^y - 1 (mod q)` until only a handful of partial summands remain,
//! those are added, and a final correction brings the value into `[0, q)`.

use crate::Error;

/// The `(x, y)` exponent pairs that describe a supported prime.
pub const SUPPORTED_PRIMES: [(u32, u32); 3] = [(23, 13), (24, 14), (25, 14)];

/// Maximum number of partial summands produced by [`PrimeCtx::partial_summands`].
pub const MAX_PARTIAL_SUMMANDS: usize = 6;

/// A pseudo-Mersenne prime `2^x - 2^y + 1` with its derived constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeCtx {
    x: u32,
    y: u32,
    q: u32,
    half_plus: u32,
}

impl PrimeCtx {
    /// Builds the context for `2^x - 2^y + 1`.
    ///
    /// Only `(23, 13)`, `(24, 14)` and `(25, 14)` are accepted.
    pub fn new(x: u32, y: u32) -> Result<Self, Error> {
        if !SUPPORTED_PRIMES.contains(&(x, y)) {
            return Err(Error::UnsupportedPrime { x, y });
        }
        let q = (1u32 << x) - (1u32 << y) + 1;
        debug_assert!(is_prime(q));
        debug_assert_eq!((q - 1) % 512, 0);
        Ok(Self {
            x,
            y,
            q,
            half_plus: (q + 1) / 2,
        })
    }

    /// Looks a context up by the bit width of its modulus (23, 24 or 25).
    pub fn from_bits(bits: u32) -> Result<Self, Error> {
        match bits {
            23 => Self::new(23, 13),
            24 => Self::new(24, 14),
            25 => Self::new(25, 14),
            _ => Err(Error::UnsupportedPrime { x: bits, y: 0 }),
        }
    }

    /// `2^23 - 2^13 + 1`, the Dilithium modulus.
    pub fn q23() -> Self {
        Self::new(23, 13).expect("supported")
    }

    /// `2^24 - 2^14 + 1`.
    pub fn q24() -> Self {
        Self::new(24, 14).expect("supported")
    }

    /// `2^25 - 2^14 + 1`, wide enough for error-free Saber products.
    pub fn q25() -> Self {
        Self::new(25, 14).expect("supported")
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn y(&self) -> u32 {
        self.y
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `(q + 1) / 2`, the inverse of two.
    pub fn half_plus(&self) -> u32 {
        self.half_plus
    }

    /// Bit width of the modulus.
    pub fn bits(&self) -> u32 {
        self.x
    }

    /// Splits `v < 2^(2x)` into at most six signed partial summands whose sum
    /// is congruent to `v`.
    ///
    /// With `v = c1·2^x + c0`, `c1 = a·2^(x-y) + b` and `a = a1·2^(x-y) + a0`:
    ///
    /// `v ≡ c0 + b·2^y + a0·2^y + a1·(2^y - 1) - c1 - a`
    pub fn partial_summands(&self, v: u64) -> [i64; MAX_PARTIAL_SUMMANDS] {
        debug_assert!(v >> (2 * self.x) == 0);
        let (x, y) = (self.x, self.y);
        let gap = x - y;
        let lo_mask = (1u64 << x) - 1;
        let gap_mask = (1u64 << gap) - 1;

        let c0 = v & lo_mask;
        let c1 = v >> x;
        let b = c1 & gap_mask;
        let a = c1 >> gap;
        let a0 = a & gap_mask;
        let a1 = a >> gap;
        [
            c0 as i64,
            (b << y) as i64,
            (a0 << y) as i64,
            (a1 * ((1 << y) - 1)) as i64,
            -(c1 as i64),
            -(a as i64),
        ]
    }

    /// Reduces `v < 2^(2x)` into `[0, q)`.
    ///
    /// Panics in debug builds when `v` is wider than the datapath; use
    /// [`PrimeCtx::try_reduce`] for checked input.
    #[inline]
    pub fn reduce(&self, v: u64) -> u32 {
        self.reduce_counted(v).0
    }

    /// Checked variant of [`PrimeCtx::reduce`]: inputs of more than `2x` bits
    /// are rejected like the fixed-width hardware datapath would.
    pub fn try_reduce(&self, v: u64) -> Result<u32, Error> {
        if v >> (2 * self.x) != 0 {
            return Err(Error::OperandTooWide {
                bits: 64 - v.leading_zeros(),
                limit: 2 * self.x,
            });
        }
        Ok(self.reduce(v))
    }

    /// Reduction that also reports how many conditional subtractions the
    /// correction step performed.
    pub fn reduce_counted(&self, v: u64) -> (u32, u32) {
        let sum: i64 = self.partial_summands(v).iter().sum();
        // The negative summands total less than 2^x + 2^y < 2q.
        let mut acc = (sum + 2 * self.q as i64) as u64;
        let q = self.q as u64;
        let mut subtractions = 0;
        while acc >= q {
            acc -= q;
            subtractions += 1;
        }
        (acc as u32, subtractions)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    /// Halving modulo `q` with a shift and a conditional add of `(q+1)/2`.
    #[inline]
    pub fn div2(&self, a: u32) -> u32 {
        (a >> 1) + (a & 1) * self.half_plus
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut result = 1u32;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse by Fermat's little theorem. `inv(0)` is 0.
    pub fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.q as u64 - 2)
    }

    /// Maps an arbitrary signed integer to its residue in `[0, q)`.
    #[inline]
    pub fn from_signed(&self, v: i64) -> u32 {
        v.rem_euclid(self.q as i64) as u32
    }

    /// Centered representative in `(-(q-1)/2, (q-1)/2]`.
    #[inline]
    pub fn centered(&self, a: u32) -> i64 {
        if a > (self.q - 1) / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }
}

/// Several prime contexts sharing one reduction datapath.
///
/// Every configured prime computes its partial summands and the selected one
/// goes through the common correction step, so results are residue-identical
/// to a standalone context.
#[derive(Clone, Debug)]
pub struct UnifiedReducer {
    primes: Vec<PrimeCtx>,
}

impl UnifiedReducer {
    pub fn new(primes: &[PrimeCtx]) -> Self {
        Self {
            primes: primes.to_vec(),
        }
    }

    pub fn primes(&self) -> &[PrimeCtx] {
        &self.primes
    }

    /// Reduces `v` for the prime at index `select`.
    pub fn reduce(&self, select: usize, v: u64) -> u32 {
        let candidates: Vec<[i64; MAX_PARTIAL_SUMMANDS]> = self
            .primes
            .iter()
            .map(|p| p.partial_summands(v & ((1u64 << (2 * p.x)) - 1)))
            .collect();
        let ctx = &self.primes[select];
        let sum: i64 = candidates[select].iter().sum();
        ((sum + 2 * ctx.q as i64) as u64 % ctx.q as u64) as u32
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
