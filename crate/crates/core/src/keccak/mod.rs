//! Keccak core, SHA-3/SHAKE modes and the stream wrapper that feeds the
//! samplers of both schemes.

mod permutation;
pub mod samplers;
mod sponge;
mod stream;

pub use permutation::{keccak_f1600, ROUNDS};
pub use sponge::{sha3_256, sha3_512, shake, shake128, shake256, HashMode, Phase, Sponge};
pub use stream::{
    ExtractMode, LeftoverBuffer, MidBuffer192, StreamStats, XofStream, LEFTOVER_BITS, MID_BUFFER_BITS, PAIR_BITS,
};
