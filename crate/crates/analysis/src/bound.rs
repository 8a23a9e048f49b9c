//! Worst-case coefficient magnitudes.

use pqproc_core::modmath::SUPPORTED_PRIMES;
use pqproc_core::saber::{SaberLevel, EQ};
use pqproc_core::{PrimeCtx, N};

/// Peak magnitude and the narrowest supported prime that can hold it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorstCase {
    pub bound: u64,
    /// Smallest supported width whose prime exceeds `2·bound`, if any.
    pub min_prime_bits: Option<u32>,
}

/// `l · (μ/2) · (q/2) · n` for `l` accumulated products.
pub fn coefficient_bound(l: usize, mu: u32) -> u64 {
    l as u64 * (mu as u64 / 2) * (1u64 << (EQ - 1)) * N as u64
}

fn classify(bound: u64) -> WorstCase {
    let min_prime_bits = SUPPORTED_PRIMES
        .iter()
        .map(|&(x, y)| PrimeCtx::new(x, y).expect("supported"))
        .find(|ctx| ctx.q() as u64 > 2 * bound)
        .map(|ctx| ctx.bits());
    WorstCase { bound, min_prime_bits }
}

/// Bound after a full matrix-vector row.
pub fn worst_case_bound(level: SaberLevel) -> WorstCase {
    let p = level.params();
    classify(coefficient_bound(p.l, p.mu))
}

/// Bound for a single polynomial product.
pub fn single_product_bound(level: SaberLevel) -> WorstCase {
    classify(coefficient_bound(1, level.params().mu))
}
