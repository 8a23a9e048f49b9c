use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Bits of the large modulus `q = 2^13`.
pub const EQ: u32 = 13;
/// Bits of the rounding modulus `p = 2^10`.
pub const EP: u32 = 10;
pub const SEED_BYTES: usize = 32;
pub const NOISE_SEED_BYTES: usize = 32;
pub const KEY_BYTES: usize = 32;
pub const HASH_BYTES: usize = 32;
/// Bytes of one polynomial packed at 13 bits per coefficient.
pub const POLY_BYTES: usize = 416;
/// Bytes of one polynomial packed at 10 bits per coefficient.
pub const POLY_COMPRESSED_BYTES: usize = 320;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SaberLevel {
    LightSaber,
    Saber,
    FireSaber,
}

impl SaberLevel {
    pub const ALL: [SaberLevel; 3] = [SaberLevel::LightSaber, SaberLevel::Saber, SaberLevel::FireSaber];

    pub fn params(self) -> SaberParams {
        // Round-3 parameter sets.
        let (l, mu, et) = match self {
            SaberLevel::LightSaber => (2, 10, 3),
            SaberLevel::Saber => (3, 8, 4),
            SaberLevel::FireSaber => (4, 6, 6),
        };
        SaberParams { level: self, l, mu, et }
    }

    pub fn name(self) -> &'static str {
        match self {
            SaberLevel::LightSaber => "LightSaber",
            SaberLevel::Saber => "Saber",
            SaberLevel::FireSaber => "FireSaber",
        }
    }
}

impl fmt::Display for SaberLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SaberLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "lightsaber" | "light" => Ok(SaberLevel::LightSaber),
            "saber" => Ok(SaberLevel::Saber),
            "firesaber" | "fire" => Ok(SaberLevel::FireSaber),
            other => Err(Error::Malformed(format!("unknown Saber level '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaberParams {
    pub level: SaberLevel,
    /// Module rank.
    pub l: usize,
    /// Binomial parameter.
    pub mu: u32,
    /// Bits per coefficient of the message-carrying ciphertext part.
    pub et: u32,
}

impl SaberParams {
    pub fn h1(&self) -> u32 {
        1 << (EQ - EP - 1)
    }

    pub fn h2(&self) -> u32 {
        (1 << (EP - 2)) - (1 << (EP - self.et - 1)) + (1 << (EQ - EP - 1))
    }

    pub fn poly_coin_bytes(&self) -> usize {
        self.mu as usize * 256 / 8
    }

    pub fn polyvec_bytes(&self) -> usize {
        self.l * POLY_BYTES
    }

    pub fn polyvec_compressed_bytes(&self) -> usize {
        self.l * POLY_COMPRESSED_BYTES
    }

    pub fn scale_bytes(&self) -> usize {
        self.et as usize * 256 / 8
    }

    pub fn indcpa_secret_key_bytes(&self) -> usize {
        self.polyvec_bytes()
    }

    pub fn public_key_bytes(&self) -> usize {
        self.polyvec_compressed_bytes() + SEED_BYTES
    }

    pub fn secret_key_bytes(&self) -> usize {
        self.indcpa_secret_key_bytes() + self.public_key_bytes() + HASH_BYTES + KEY_BYTES
    }

    pub fn ciphertext_bytes(&self) -> usize {
        self.polyvec_compressed_bytes() + self.scale_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let sizes: Vec<_> = SaberLevel::ALL
            .iter()
            .map(|l| {
                let p = l.params();
                (p.public_key_bytes(), p.secret_key_bytes(), p.ciphertext_bytes())
            })
            .collect();
        assert_eq!(sizes, vec![(672, 1568, 736), (992, 2304, 1088), (1312, 3040, 1472)]);
    }

    #[test]
    fn rounding_constants() {
        let p = SaberLevel::Saber.params();
        assert_eq!(p.h1(), 4);
        assert_eq!(p.h2(), 256 - 32 + 4);
        assert_eq!(SaberLevel::LightSaber.params().h2(), 256 - 64 + 4);
        assert_eq!(SaberLevel::FireSaber.params().h2(), 256 - 8 + 4);
    }

    #[test]
    fn parse_names() {
        assert_eq!("firesaber".parse::<SaberLevel>().unwrap(), SaberLevel::FireSaber);
        assert!("kyber".parse::<SaberLevel>().is_err());
    }
}
