//! Parameter sets for the three security levels.

use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Dilithium modulus, shared with the 23-bit NTT context.
pub const Q: u32 = 8_380_417;
/// Dropped bits in `t`.
pub const D: u32 = 13;
pub const SEED_BYTES: usize = 32;
/// Width of `mu` and `rho'` (round-3 v3.1 layout).
pub const CRH_BYTES: usize = 64;
pub const TR_BYTES: usize = 32;
pub const T1_BYTES: usize = 320;
pub const T0_BYTES: usize = 416;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DilithiumLevel {
    Dilithium2,
    Dilithium3,
    Dilithium5,
}

impl DilithiumLevel {
    pub const ALL: [DilithiumLevel; 3] = [
        DilithiumLevel::Dilithium2,
        DilithiumLevel::Dilithium3,
        DilithiumLevel::Dilithium5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DilithiumLevel::Dilithium2 => "Dilithium2",
            DilithiumLevel::Dilithium3 => "Dilithium3",
            DilithiumLevel::Dilithium5 => "Dilithium5",
        }
    }

    /// NIST level number.
    pub fn number(self) -> u32 {
        match self {
            DilithiumLevel::Dilithium2 => 2,
            DilithiumLevel::Dilithium3 => 3,
            DilithiumLevel::Dilithium5 => 5,
        }
    }

    // Round-3 parameter sets.
    pub fn params(self) -> DilithiumParams {
        match self {
            DilithiumLevel::Dilithium2 => DilithiumParams {
                level: self,
                k: 4,
                l: 4,
                eta: 2,
                tau: 39,
                beta: 78,
                gamma1: 1 << 17,
                gamma2: (Q - 1) / 88,
                omega: 80,
            },
            DilithiumLevel::Dilithium3 => DilithiumParams {
                level: self,
                k: 6,
                l: 5,
                eta: 4,
                tau: 49,
                beta: 196,
                gamma1: 1 << 19,
                gamma2: (Q - 1) / 32,
                omega: 55,
            },
            DilithiumLevel::Dilithium5 => DilithiumParams {
                level: self,
                k: 8,
                l: 7,
                eta: 2,
                tau: 60,
                beta: 120,
                gamma1: 1 << 19,
                gamma2: (Q - 1) / 32,
                omega: 75,
            },
        }
    }
}

impl fmt::Display for DilithiumLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DilithiumLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "2" | "dilithium2" => Ok(DilithiumLevel::Dilithium2),
            "3" | "dilithium3" => Ok(DilithiumLevel::Dilithium3),
            "5" | "dilithium5" => Ok(DilithiumLevel::Dilithium5),
            _ => Err(Error::Malformed(format!("unknown Dilithium level `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DilithiumParams {
    pub level: DilithiumLevel,
    /// Rows of `A`.
    pub k: usize,
    /// Columns of `A`.
    pub l: usize,
    pub eta: u32,
    pub tau: usize,
    pub beta: u32,
    pub gamma1: u32,
    pub gamma2: u32,
    pub omega: usize,
}

impl DilithiumParams {
    pub fn alpha(&self) -> u32 {
        2 * self.gamma2
    }

    /// Number of distinct high-bit values, `(q-1)/α`.
    pub fn w1_range(&self) -> u32 {
        (Q - 1) / self.alpha()
    }

    pub fn eta_bits(&self) -> u32 {
        if self.eta == 2 {
            3
        } else {
            4
        }
    }

    pub fn z_bits(&self) -> u32 {
        if self.gamma1 == 1 << 17 {
            18
        } else {
            20
        }
    }

    pub fn w1_bits(&self) -> u32 {
        if self.w1_range() == 44 {
            6
        } else {
            4
        }
    }

    pub fn eta_bytes(&self) -> usize {
        32 * self.eta_bits() as usize
    }

    pub fn z_bytes(&self) -> usize {
        32 * self.z_bits() as usize
    }

    pub fn w1_bytes(&self) -> usize {
        32 * self.w1_bits() as usize
    }

    pub fn hint_bytes(&self) -> usize {
        self.omega + self.k
    }

    pub fn public_key_bytes(&self) -> usize {
        SEED_BYTES + self.k * T1_BYTES
    }

    pub fn secret_key_bytes(&self) -> usize {
        2 * SEED_BYTES + TR_BYTES + (self.l + self.k) * self.eta_bytes() + self.k * T0_BYTES
    }

    pub fn signature_bytes(&self) -> usize {
        SEED_BYTES + self.l * self.z_bytes() + self.hint_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let want = [(1312, 2528, 2420), (1952, 4000, 3293), (2592, 4864, 4595)];
        for (lvl, (pk, sk, sig)) in DilithiumLevel::ALL.into_iter().zip(want) {
            let p = lvl.params();
            assert_eq!(p.public_key_bytes(), pk, "{lvl}");
            assert_eq!(p.secret_key_bytes(), sk, "{lvl}");
            assert_eq!(p.signature_bytes(), sig, "{lvl}");
        }
    }

    #[test]
    fn level5_shape() {
        let p = DilithiumLevel::Dilithium5.params();
        assert_eq!(p.k * p.l, 56);
        assert_eq!(p.l + 2 * p.k, 23);
    }

    #[test]
    fn beta_is_tau_eta() {
        for lvl in DilithiumLevel::ALL {
            let p = lvl.params();
            assert_eq!(p.beta, p.tau as u32 * p.eta);
        }
    }

    #[test]
    fn parse() {
        assert_eq!("3".parse::<DilithiumLevel>().unwrap(), DilithiumLevel::Dilithium3);
        assert_eq!("Dilithium5".parse::<DilithiumLevel>().unwrap(), DilithiumLevel::Dilithium5);
        assert!("4".parse::<DilithiumLevel>().is_err());
    }
}
