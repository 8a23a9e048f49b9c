use super::permutation::keccak_f1600;

/// The four hash modes sharing the Keccak core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HashMode {
    Sha3_256,
    Sha3_512,
    Shake128,
    Shake256,
}

impl HashMode {
    /// Rate in bytes.
    pub fn rate(self) -> usize {
        match self {
            HashMode::Shake128 => 168,
            HashMode::Shake256 | HashMode::Sha3_256 => 136,
            HashMode::Sha3_512 => 72,
        }
    }

    pub fn rate_bits(self) -> usize {
        self.rate() * 8
    }

    fn domain(self) -> u8 {
        match self {
            HashMode::Sha3_256 | HashMode::Sha3_512 => 0x06,
            HashMode::Shake128 | HashMode::Shake256 => 0x1f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Absorbing,
    Squeezing,
}

/// Byte-oriented sponge over Keccak-f[1600].
#[derive(Clone, Debug)]
pub struct Sponge {
    state: [u64; 25],
    mode: HashMode,
    pos: usize,
    phase: Phase,
    permutations: usize,
}

impl Sponge {
    pub fn new(mode: HashMode) -> Self {
        Self {
            state: [0; 25],
            mode,
            pos: 0,
            phase: Phase::Absorbing,
            permutations: 0,
        }
    }

    pub fn mode(&self) -> HashMode {
        self.mode
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Permutation calls so far.
    pub fn permutations(&self) -> usize {
        self.permutations
    }

    fn xor_byte(&mut self, i: usize, b: u8) {
        self.state[i / 8] ^= (b as u64) << (8 * (i % 8));
    }

    fn byte(&self, i: usize) -> u8 {
        (self.state[i / 8] >> (8 * (i % 8))) as u8
    }

    fn permute(&mut self) {
        keccak_f1600(&mut self.state);
        self.permutations += 1;
    }

    /// Absorbs more input. Panics if called after squeezing started.
    pub fn absorb(&mut self, data: &[u8]) {
        assert_eq!(self.phase, Phase::Absorbing, "absorb after squeeze");
        let rate = self.mode.rate();
        for &b in data {
            self.xor_byte(self.pos, b);
            self.pos += 1;
            if self.pos == rate {
                self.permute();
                self.pos = 0;
            }
        }
    }

    fn finalize(&mut self) {
        if self.phase == Phase::Squeezing {
            return;
        }
        let rate = self.mode.rate();
        self.xor_byte(self.pos, self.mode.domain());
        self.xor_byte(rate - 1, 0x80);
        self.phase = Phase::Squeezing;
        // Force a permutation before the first output byte.
        self.pos = rate;
    }

    /// Returns the next full rate-sized output block.
    pub fn squeeze_block(&mut self) -> Vec<u8> {
        self.finalize();
        self.permute();
        self.pos = self.mode.rate();
        (0..self.mode.rate()).map(|i| self.byte(i)).collect()
    }

    /// Fills `out` with the next output bytes.
    pub fn squeeze(&mut self, out: &mut [u8]) {
        self.finalize();
        let rate = self.mode.rate();
        for o in out.iter_mut() {
            if self.pos == rate {
                self.permute();
                self.pos = 0;
            }
            *o = self.byte(self.pos);
            self.pos += 1;
        }
    }
}

fn digest<const L: usize>(mode: HashMode, parts: &[&[u8]]) -> [u8; L] {
    let mut s = Sponge::new(mode);
    for p in parts {
        s.absorb(p);
    }
    let mut out = [0u8; L];
    s.squeeze(&mut out);
    out
}

pub fn sha3_256(msg: &[u8]) -> [u8; 32] {
    digest(HashMode::Sha3_256, &[msg])
}

pub fn sha3_512(msg: &[u8]) -> [u8; 64] {
    digest(HashMode::Sha3_512, &[msg])
}

/// SHAKE output of `len` bytes over the concatenation of `parts`.
pub fn shake(mode: HashMode, parts: &[&[u8]], len: usize) -> Vec<u8> {
    let mut s = Sponge::new(mode);
    for p in parts {
        s.absorb(p);
    }
    let mut out = vec![0u8; len];
    s.squeeze(&mut out);
    out
}

pub fn shake128(msg: &[u8], len: usize) -> Vec<u8> {
    shake(HashMode::Shake128, &[msg], len)
}

pub fn shake256(msg: &[u8], len: usize) -> Vec<u8> {
    shake(HashMode::Shake256, &[msg], len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use sha3::digest::{ExtendableOutput, Update, XofReader};
    use sha3::Digest;

    #[test]
    fn empty_message_vectors() {
        assert_eq!(
            hex::encode(sha3_256(b"")),
            "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
        );
        assert_eq!(
            hex::encode(sha3_512(b"")),
            "a69f73cca23a9ac5c8b567dc185a756e97c982164fe25859e0d1dcc1475c80a6\
             15b2123af1f5f94c11e3e9402c3ac558f500199d95b6d3e301758586281dcd26"
        );
        assert_eq!(
            hex::encode(shake128(b"", 32)),
            "7f9c2ba4e88f827d616045507605853ed73b8093f6efbc88eb1a6eacfa66ef26"
        );
        assert_eq!(
            hex::encode(shake256(b"", 32)),
            "46b9dd2b0ba88d13233b3feb743eeb243fcd52ea62b81b82b50c27646ed5762f"
        );
    }

    #[test]
    fn block_and_byte_squeeze_agree() {
        let mut a = Sponge::new(HashMode::Shake128);
        a.absorb(b"abc");
        let mut two = a.squeeze_block();
        two.extend(a.squeeze_block());
        assert_eq!(two.len(), 336);
        assert_eq!(two, shake128(b"abc", 336));

        let mut b = Sponge::new(HashMode::Shake128);
        b.absorb(b"abc");
        let mut out = vec![0u8; 336];
        let (x, y) = out.split_at_mut(100);
        b.squeeze(x);
        b.squeeze(y);
        assert_eq!(out, two);
    }

    #[test]
    fn matches_second_implementation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut big = vec![0u8; 1 << 20];
        rng.fill_bytes(&mut big);
        assert_eq!(sha3_512(&big).as_slice(), sha3::Sha3_512::digest(&big).as_slice());

        for len in [0usize, 1, 135, 136, 137, 167, 168, 169, 1000] {
            let msg = &big[..len];
            assert_eq!(sha3_256(msg).as_slice(), sha3::Sha3_256::digest(msg).as_slice());
            let mut h = sha3::Shake256::default();
            h.update(msg);
            let mut want = vec![0u8; 300];
            h.finalize_xof().read(&mut want);
            assert_eq!(shake256(msg, 300), want);
            let mut h = sha3::Shake128::default();
            h.update(msg);
            h.finalize_xof().read(&mut want);
            assert_eq!(shake128(msg, 300), want);
        }
    }

    #[test]
    fn incremental_absorb() {
        let mut s = Sponge::new(HashMode::Shake256);
        s.absorb(b"hello ");
        s.absorb(b"world");
        let mut out = [0u8; 64];
        s.squeeze(&mut out);
        assert_eq!(out.to_vec(), shake256(b"hello world", 64));
    }
}
