//! Power2Round, Decompose and the hint pair.
//!
//! The `_mod` variants take the modulus explicitly so the identities can be
//! brute-forced on a small analog.

use super::params::{D, Q};

/// `r = r1·2^13 + r0` with `r0 ∈ (-4096, 4096]`.
pub fn power2round(r: u32) -> (u32, i32) {
    let r1 = (r + (1 << (D - 1)) - 1) >> D;
    (r1, r as i32 - (r1 << D) as i32)
}

/// Decompose with `α = 2γ2` over an arbitrary modulus `q` with `α | q-1`.
pub fn decompose_mod(r: u32, gamma2: u32, q: u32) -> (u32, i32) {
    let alpha = 2 * gamma2;
    let mut r0 = (r % alpha) as i32;
    if r0 > gamma2 as i32 {
        r0 -= alpha as i32;
    }
    let diff = (r as i64 - r0 as i64) as u32;
    if diff == q - 1 {
        (0, r0 - 1)
    } else {
        (diff / alpha, r0)
    }
}

pub fn decompose(r: u32, gamma2: u32) -> (u32, i32) {
    decompose_mod(r, gamma2, Q)
}

pub fn highbits(r: u32, gamma2: u32) -> u32 {
    decompose(r, gamma2).0
}

pub fn lowbits(r: u32, gamma2: u32) -> i32 {
    decompose(r, gamma2).1
}

/// Hint bit telling whether adding `z` to `r` changes the high bits.
pub fn make_hint_mod(z: i64, r: u32, gamma2: u32, q: u32) -> bool {
    let rz = (r as i64 + z).rem_euclid(q as i64) as u32;
    decompose_mod(r, gamma2, q).0 != decompose_mod(rz, gamma2, q).0
}

pub fn make_hint(z: i64, r: u32, gamma2: u32) -> bool {
    make_hint_mod(z, r, gamma2, Q)
}

/// Hint from an already split value: `low` is the low part of `w - cs2 + ct0`
/// and `high` the high bits of `w`. This is the form the signer uses.
pub fn make_hint_low(low: i32, high: u32, gamma2: u32) -> bool {
    let g = gamma2 as i32;
    low > g || low < -g || (low == -g && high != 0)
}

pub fn use_hint_mod(hint: bool, r: u32, gamma2: u32, q: u32) -> u32 {
    let (r1, r0) = decompose_mod(r, gamma2, q);
    if !hint {
        return r1;
    }
    let m = (q - 1) / (2 * gamma2);
    if r0 > 0 {
        (r1 + 1) % m
    } else {
        (r1 + m - 1) % m
    }
}

pub fn use_hint(hint: bool, r: u32, gamma2: u32) -> u32 {
    use_hint_mod(hint, r, gamma2, Q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G88: u32 = (Q - 1) / 88;
    const G32: u32 = (Q - 1) / 32;

    /// Constant-time decomposition from the reference code.
    fn reference_decompose(a: i32, gamma2: u32) -> (i32, i32) {
        let mut a1 = (a + 127) >> 7;
        if gamma2 == G32 {
            a1 = (a1 * 1025 + (1 << 21)) >> 22;
            a1 &= 15;
        } else {
            a1 = (a1 * 11275 + (1 << 23)) >> 24;
            a1 ^= ((43 - a1) >> 31) & a1;
        }
        let mut a0 = a - a1 * 2 * gamma2 as i32;
        a0 -= (((Q as i32 - 1) / 2 - a0) >> 31) & Q as i32;
        (a1, a0)
    }

    #[test]
    fn power2round_examples() {
        assert_eq!(power2round(8192), (1, 0));
        assert_eq!(power2round(4096), (0, 4096));
        assert_eq!(power2round(4097), (1, -4095));
        assert_eq!(power2round(0), (0, 0));
    }

    #[test]
    fn power2round_exhaustive() {
        for r in 0..Q {
            let (r1, r0) = power2round(r);
            assert!(r0 > -4096 && r0 <= 4096);
            assert_eq!(((r1 as i64) << 13) + r0 as i64, r as i64);
        }
    }

    #[test]
    fn decompose_examples() {
        for g in [G88, G32] {
            assert_eq!(decompose(g, g), (0, g as i32));
            assert_eq!(decompose(g + 1, g), (1, -(g as i32) + 1));
        }
    }

    #[test]
    fn decompose_top_boundary() {
        // Frozen from the reference decomposition.
        assert_eq!(reference_decompose(Q as i32 - 1, G88), (0, -1));
        assert_eq!(reference_decompose(Q as i32 - 1, G32), (0, -1));
        assert_eq!(decompose(Q - 1, G88), (0, -1));
        assert_eq!(decompose(Q - 1, G32), (0, -1));
        assert_eq!(decompose(Q - 1 - G32, G32), (15, G32 as i32));
        assert_eq!(decompose(Q - G32, G32), (0, -(G32 as i32)));
    }

    #[test]
    fn decompose_matches_reference_everywhere() {
        for g in [G88, G32] {
            for r in 0..Q {
                let (r1, r0) = decompose(r, g);
                assert_eq!((r1 as i32, r0), reference_decompose(r as i32, g), "r={r} g={g}");
            }
        }
    }

    #[test]
    fn zero_hint() {
        for r in [0, 1, 95_232, Q - 1] {
            assert!(!make_hint(0, r, G32));
            assert_eq!(use_hint(false, r, G32), highbits(r, G32));
        }
    }

    #[test]
    fn hint_recovery_small_modulus() {
        // q = 97 is prime and 96 has many even divisors.
        let q = 97u32;
        for gamma2 in [2u32, 3, 4, 6, 8, 12, 16, 24] {
            for r in 0..q {
                for z in -(gamma2 as i64)..=gamma2 as i64 {
                    let h = make_hint_mod(z, r, gamma2, q);
                    let rz = (r as i64 + z).rem_euclid(q as i64) as u32;
                    assert_eq!(
                        use_hint_mod(h, r, gamma2, q),
                        decompose_mod(rz, gamma2, q).0,
                        "q={q} g={gamma2} r={r} z={z}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn hint_recovery(r in 0..Q, z in -(G32 as i64)..=G32 as i64, wide in any::<bool>()) {
            let g = if wide { G32 } else { G88 };
            let z = z.clamp(-(g as i64), g as i64);
            let h = make_hint(z, r, g);
            let rz = (r as i64 + z).rem_euclid(Q as i64) as u32;
            prop_assert_eq!(use_hint(h, r, g), highbits(rz, g));
        }

        #[test]
        fn low_form_agrees(w in 0..Q, u in -1000i64..1000, v in -200_000i64..200_000, wide in any::<bool>()) {
            let g = if wide { G32 } else { G88 };
            let (w1, w0) = decompose(w, g);
            // Signer preconditions: the low part minus cs2 stays well inside γ2
            // and ct0 is below γ2.
            prop_assume!(((w0 as i64) - u).abs() < g as i64 - 1000);
            prop_assume!(v.abs() < g as i64);
            let r = (w as i64 - u + v).rem_euclid(Q as i64) as u32;
            let reference = make_hint(-v, r, g);
            let fast = make_hint_low((w0 as i64 - u + v) as i32, w1, g);
            prop_assert_eq!(reference, fast);
        }
    }
}
