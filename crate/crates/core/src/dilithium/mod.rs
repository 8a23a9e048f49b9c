//! Dilithium signatures (round 3) over the shared 23-bit NTT and Keccak units.

mod expand;
mod packing;
mod params;
mod rounding;
mod sign;

pub use expand::{eta_poly, expand_a, expand_mask, expand_s, gamma_poly, uniform_poly};
pub use packing::{hint_weight, pack_hint, pack_pk, pack_poly, pack_w1, unpack_hint, unpack_pk, unpack_poly, PackKind, SecretKey, Signature};
pub use params::*;
pub use rounding::*;
pub use sign::{crh, Attempt, Dilithium, DilithiumKeyPair, DilithiumMultiplier, PreSign, Rejection, SignOutput};
