//! Functional model of a unified lattice cryptoprocessor: shared NTT and
//! Keccak datapaths driving both the Saber KEM and the Dilithium signature
//! scheme.

pub mod dilithium;
mod error;
pub mod kat;
pub mod keccak;
pub mod modmath;
pub mod ntt;
pub mod poly;
pub mod saber;
pub mod schedule;

pub use error::Error;
pub use modmath::{PrimeCtx, UnifiedReducer};
pub use poly::{Modulus, Poly, PolyMat, PolyVec, N};
