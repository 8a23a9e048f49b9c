//! Saber KEM (round 3) over the shared NTT and Keccak units.

mod kem;
mod mul;
mod pack;
mod params;

pub use kem::{add_pack, add_round, gen_matrix, gen_matrix_from, gen_secret, unpack_msg, SaberKem, SaberKeyPair};
pub use mul::{inner_prod, lift_centered, mul_acc, mv_mul, mv_mul_ntt, SaberMultiplier};
pub use pack::{bs2polvec, cmov, copy, msg_to_poly, pack_bits, poly_to_msg, polvec_to_bytes, unpack_bits, verify_ct};
pub use params::*;
