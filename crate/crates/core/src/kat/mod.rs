//! Known-answer-test support: the NIST DRBG, `.rsp` files and a runner
//! that regenerates and compares entries for both schemes.

mod drbg;
mod rsp;
mod runner;

pub use drbg::{kat_entropy, NistDrbg};
pub use rsp::{render_entry, KatEntry, KatFile};
pub use runner::*;
