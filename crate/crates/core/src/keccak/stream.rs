//! Output wrapper around the Keccak core.
//!
//! Squeezed blocks are consumed as one little-endian bit stream in FIPS-202
//! byte order. Three read paths exist:
//!
//! * 13-bit coefficients, taken in pairs of 26 bits. The tail of each block
//!   that cannot hold a full pair is kept in a 24-bit leftover register and
//!   prepended to the next block.
//! * Direct fixed-width reads (18/20 bits for mask sampling, or the
//!   binomial sampler's μ bits).
//! * 4/8/24/64-bit reads drained from a 192-bit staging buffer.

use super::sponge::{HashMode, Sponge};
use crate::Error;

/// Bits per coefficient pair in 13-bit mode.
pub const PAIR_BITS: u32 = 26;
/// Width of the leftover register.
pub const LEFTOVER_BITS: u32 = 24;
/// Width of the staging buffer.
pub const MID_BUFFER_BITS: u32 = 192;

/// Which read path a stream is configured for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractMode {
    /// Pairs of 13-bit coefficients.
    Coeff13,
    /// Reads of exactly this many bits (at most 64).
    Direct(u32),
    /// 4, 8, 24 or 64-bit reads through the 192-bit staging buffer.
    Buffered192,
}

impl ExtractMode {
    fn label(self) -> u32 {
        match self {
            ExtractMode::Coeff13 => 13,
            ExtractMode::Direct(w) => w,
            ExtractMode::Buffered192 => MID_BUFFER_BITS,
        }
    }
}

/// Counters describing how the stream has been used.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub blocks: usize,
    pub squeezed_bits: u64,
    pub consumed_bits: u64,
    /// Leftover-register fill after each block boundary in 13-bit mode.
    pub leftover_history: Vec<u32>,
    pub shifts_by_4: usize,
    pub shifts_by_2: usize,
}

/// Carries the tail of a block into the next one in 13-bit mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LeftoverBuffer {
    pub bits: u32,
    pub count: u32,
}

/// 192-bit staging buffer, stored as three 64-bit lanes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MidBuffer192 {
    lanes: [u64; 3],
    fill: u32,
    read: u32,
}

impl MidBuffer192 {
    pub fn available(&self) -> u32 {
        self.fill - self.read
    }

    fn take(&mut self, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        let lane = (self.read / 64) as usize;
        let off = self.read % 64;
        let mut v = self.lanes[lane] >> off;
        if off + width > 64 {
            v |= self.lanes[lane + 1] << (64 - off);
        }
        self.read += width;
        v & mask(width)
    }
}

fn mask(width: u32) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Incremental squeeze stream with the wrapper's buffers.
#[derive(Clone, Debug)]
pub struct XofStream {
    sponge: Sponge,
    mode: ExtractMode,
    block: Vec<u8>,
    /// Next unread bit of `block`.
    bit_pos: usize,
    leftover: LeftoverBuffer,
    mid: MidBuffer192,
    stats: StreamStats,
}

impl XofStream {
    /// Starts squeezing an already-absorbed sponge.
    pub fn from_sponge(sponge: Sponge, mode: ExtractMode) -> Self {
        if let ExtractMode::Direct(w) = mode {
            assert!((1..=64).contains(&w), "direct width must be 1..=64");
        }
        Self {
            sponge,
            mode,
            block: Vec::new(),
            bit_pos: 0,
            leftover: LeftoverBuffer::default(),
            mid: MidBuffer192::default(),
            stats: StreamStats::default(),
        }
    }

    /// SHAKE stream over the concatenation of `parts`.
    pub fn new(hash: HashMode, parts: &[&[u8]], mode: ExtractMode) -> Self {
        let mut sponge = Sponge::new(hash);
        for p in parts {
            sponge.absorb(p);
        }
        Self::from_sponge(sponge, mode)
    }

    pub fn mode(&self) -> ExtractMode {
        self.mode
    }

    pub fn stats(&self) -> &StreamStats {
        &self.stats
    }

    pub fn leftover(&self) -> LeftoverBuffer {
        self.leftover
    }

    /// Bits squeezed but not yet handed out.
    pub fn buffered_bits(&self) -> u64 {
        let in_block = (self.block.len() * 8 - self.bit_pos) as u64;
        in_block + self.leftover.count as u64 + self.mid.available() as u64
    }

    fn block_remaining(&self) -> usize {
        self.block.len() * 8 - self.bit_pos
    }

    fn refill_block(&mut self) {
        debug_assert_eq!(self.block_remaining(), 0);
        self.block = self.sponge.squeeze_block();
        self.bit_pos = 0;
        self.stats.blocks += 1;
        self.stats.squeezed_bits += self.block.len() as u64 * 8;
    }

    /// Reads up to 64 bits from the current block only.
    fn block_bits(&mut self, width: u32) -> u64 {
        debug_assert!(width as usize <= self.block_remaining());
        let mut v = 0u64;
        let mut got = 0u32;
        while got < width {
            let byte = self.block[self.bit_pos / 8] as u64;
            let off = (self.bit_pos % 8) as u32;
            let take = (8 - off).min(width - got);
            v |= ((byte >> off) & mask(take)) << got;
            got += take;
            self.bit_pos += take as usize;
        }
        v
    }

    /// Reads `width` bits, continuing into fresh blocks as needed.
    fn raw_bits(&mut self, width: u32) -> u64 {
        let mut v = 0u64;
        let mut got = 0u32;
        while got < width {
            if self.block_remaining() == 0 {
                self.refill_block();
            }
            let take = (width - got).min(self.block_remaining() as u32);
            v |= self.block_bits(take) << got;
            got += take;
        }
        v
    }

    fn check_mode(&self, expected: ExtractMode, requested: u32) -> Result<(), Error> {
        if self.mode != expected {
            return Err(Error::ModeMismatch {
                configured: self.mode.label(),
                requested,
            });
        }
        Ok(())
    }

    /// Next pair of 13-bit coefficients.
    pub fn next_coeff_pair(&mut self) -> Result<(u16, u16), Error> {
        self.check_mode(ExtractMode::Coeff13, 13)?;
        if self.block.is_empty() {
            self.refill_block();
        }
        let pair = if self.block_remaining() as u32 >= PAIR_BITS {
            self.block_bits(PAIR_BITS)
        } else {
            self.carry_leftover();
            let c = self.leftover.count;
            let fresh = self.block_bits(PAIR_BITS - c);
            let v = self.leftover.bits as u64 | (fresh << c);
            self.leftover = LeftoverBuffer::default();
            v
        };
        self.stats.consumed_bits += PAIR_BITS as u64;
        Ok(((pair & 0x1fff) as u16, (pair >> 13) as u16))
    }

    /// Moves the block tail into the leftover register, squeezes a new
    /// block and aligns the register using shifts by 4 and 2 only.
    fn carry_leftover(&mut self) {
        let c = self.block_remaining() as u32;
        debug_assert!(c < PAIR_BITS);
        assert!(c % 2 == 0 && c <= LEFTOVER_BITS, "leftover count {c} breaks the pair framing");
        let tail = self.block_bits(c) as u32;
        // The tail lands at the top of the register and is shifted down.
        let mut reg = tail << (LEFTOVER_BITS - c);
        let mut shift = LEFTOVER_BITS - c;
        while shift >= 4 {
            reg >>= 4;
            shift -= 4;
            self.stats.shifts_by_4 += 1;
        }
        if shift == 2 {
            reg >>= 2;
            self.stats.shifts_by_2 += 1;
        }
        self.leftover = LeftoverBuffer { bits: reg, count: c };
        self.stats.leftover_history.push(c);
        self.refill_block();
    }

    /// Next 13-bit coefficient; pairs are split and served low half first.
    pub fn next_coeff13(&mut self, pending: &mut Option<u16>) -> Result<u16, Error> {
        if let Some(c) = pending.take() {
            return Ok(c);
        }
        let (a, b) = self.next_coeff_pair()?;
        *pending = Some(b);
        Ok(a)
    }

    /// Direct read of the configured width.
    pub fn next_direct(&mut self, width: u32) -> Result<u64, Error> {
        self.check_mode(ExtractMode::Direct(width), width)?;
        self.stats.consumed_bits += width as u64;
        Ok(self.raw_bits(width))
    }

    /// Read of 4, 8, 24 or 64 bits through the staging buffer.
    pub fn next_buffered(&mut self, width: u32) -> Result<u64, Error> {
        self.check_mode(ExtractMode::Buffered192, width)?;
        if !matches!(width, 4 | 8 | 24 | 64) {
            return Err(Error::ModeMismatch {
                configured: MID_BUFFER_BITS,
                requested: width,
            });
        }
        if self.mid.available() < width {
            self.refill_mid();
        }
        self.stats.consumed_bits += width as u64;
        Ok(self.mid.take(width))
    }

    /// Tops the staging buffer back up to 192 bits. Any bits still
    /// unread stay in front of the fresh ones.
    fn refill_mid(&mut self) {
        let keep = self.mid.available();
        let rest = self.mid.take(keep);
        let mut lanes = [0u64; 3];
        let mut fill = 0u32;
        let mut push = |v: u64, w: u32| {
            let lane = (fill / 64) as usize;
            let off = fill % 64;
            lanes[lane] |= v << off;
            if off + w > 64 {
                lanes[lane + 1] |= v >> (64 - off);
            }
            fill += w;
        };
        if keep > 0 {
            push(rest, keep);
        }
        let mut need = MID_BUFFER_BITS - keep;
        while need > 0 {
            let w = need.min(64 - (MID_BUFFER_BITS - need) % 64).min(64);
            let v = self.raw_bits(w);
            push(v, w);
            need -= w;
        }
        self.mid = MidBuffer192 {
            lanes,
            fill: MID_BUFFER_BITS,
            read: 0,
        };
    }

    /// Width-dispatching read for 4, 8, 18, 20, 24 and 64 bits.
    pub fn next_bits(&mut self, width: u32) -> Result<u64, Error> {
        match self.mode {
            ExtractMode::Direct(_) => self.next_direct(width),
            ExtractMode::Buffered192 => self.next_buffered(width),
            ExtractMode::Coeff13 => Err(Error::ModeMismatch {
                configured: 13,
                requested: width,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha3::digest::{ExtendableOutput, Update, XofReader};

    /// Independent parser: one long squeeze, bits pulled one at a time.
    struct Naive {
        bytes: Vec<u8>,
        pos: usize,
    }

    impl Naive {
        fn new128(seed: &[u8], len: usize) -> Self {
            let mut h = sha3::Shake128::default();
            h.update(seed);
            let mut bytes = vec![0u8; len];
            h.finalize_xof().read(&mut bytes);
            Self { bytes, pos: 0 }
        }

        fn take(&mut self, w: u32) -> u64 {
            let mut v = 0;
            for i in 0..w {
                let bit = (self.bytes[self.pos / 8] >> (self.pos % 8)) & 1;
                v |= (bit as u64) << i;
                self.pos += 1;
            }
            v
        }
    }

    #[test]
    fn first_block_leaves_eighteen_bits() {
        let mut s = XofStream::new(HashMode::Shake128, &[b"seed"], ExtractMode::Coeff13);
        for _ in 0..51 {
            s.next_coeff_pair().unwrap();
        }
        assert_eq!(s.stats().blocks, 1);
        s.next_coeff_pair().unwrap();
        assert_eq!(s.stats().leftover_history, vec![18]);
        // 24 - 18 = 6 = one shift by 4 and one by 2.
        assert_eq!((s.stats().shifts_by_4, s.stats().shifts_by_2), (1, 1));
    }

    #[test]
    fn leftover_sequence_is_even_and_bounded() {
        let mut s = XofStream::new(HashMode::Shake128, &[&[1u8; 32]], ExtractMode::Coeff13);
        for _ in 0..5000 {
            s.next_coeff_pair().unwrap();
        }
        let hist = &s.stats().leftover_history;
        assert_eq!(&hist[..4], &[18, 10, 2, 20]);
        assert!(hist.iter().all(|&c| c % 2 == 0 && c <= 24));
    }

    #[test]
    fn coeff13_matches_naive_parse() {
        let seed = [7u8; 32];
        let mut s = XofStream::new(HashMode::Shake128, &[&seed], ExtractMode::Coeff13);
        let mut naive = Naive::new128(&seed, 4000);
        let mut pending = None;
        for _ in 0..2000 {
            assert_eq!(s.next_coeff13(&mut pending).unwrap() as u64, naive.take(13));
        }
    }

    #[test]
    fn direct_reads_cross_block_boundaries() {
        for w in [18u32, 20] {
            let seed = [w as u8; 32];
            let mut s = XofStream::new(HashMode::Shake128, &[&seed], ExtractMode::Direct(w));
            let mut naive = Naive::new128(&seed, 2000);
            for _ in 0..700 {
                assert_eq!(s.next_bits(w).unwrap(), naive.take(w));
            }
        }
    }

    #[test]
    fn buffered_reads_are_consistent() {
        let mk = || XofStream::new(HashMode::Shake128, &[b"x"], ExtractMode::Buffered192);
        let mut nibbles = mk();
        let mut wide = mk();
        let refill = [wide.next_bits(64).unwrap(), wide.next_bits(64).unwrap(), wide.next_bits(64).unwrap()];
        for i in 0..48 {
            let want = (refill[i / 16] >> (4 * (i % 16))) & 0xf;
            assert_eq!(nibbles.next_bits(4).unwrap(), want);
        }

        let mut a = mk();
        let mut b = mk();
        let mut bits24 = Vec::new();
        for _ in 0..8 {
            bits24.push(a.next_bits(24).unwrap());
        }
        let words = [b.next_bits(64).unwrap(), b.next_bits(64).unwrap(), b.next_bits(64).unwrap()];
        let joined: u128 = words[0] as u128 | (words[1] as u128) << 64;
        for (i, v) in bits24.iter().enumerate().take(5) {
            assert_eq!(*v, ((joined >> (24 * i)) & 0xff_ffff) as u64);
        }
        assert_eq!(bits24[7], words[2] >> 40);
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let mut s = XofStream::new(HashMode::Shake128, &[b""], ExtractMode::Direct(18));
        assert!(matches!(s.next_bits(20), Err(Error::ModeMismatch { configured: 18, requested: 20 })));
        assert!(s.next_coeff_pair().is_err());
        let mut b = XofStream::new(HashMode::Shake128, &[b""], ExtractMode::Buffered192);
        assert!(b.next_bits(13).is_err());
        let mut c = XofStream::new(HashMode::Shake128, &[b""], ExtractMode::Coeff13);
        assert!(c.next_bits(4).is_err());
    }

    #[test]
    fn conservation_across_modes() {
        let mut s = XofStream::new(HashMode::Shake256, &[b"abc"], ExtractMode::Buffered192);
        for i in 0..500 {
            s.next_bits([4, 8, 24, 64][i % 4]).unwrap();
            let st = s.stats();
            assert_eq!(st.squeezed_bits, st.consumed_bits + s.buffered_bits());
        }
        let mut c = XofStream::new(HashMode::Shake128, &[b"abc"], ExtractMode::Coeff13);
        for _ in 0..500 {
            c.next_coeff_pair().unwrap();
            let st = c.stats();
            assert_eq!(st.squeezed_bits, st.consumed_bits + c.buffered_bits());
        }
    }

    #[test]
    fn split_squeeze_equals_single_squeeze() {
        let mut s = XofStream::new(HashMode::Shake128, &[b"q"], ExtractMode::Direct(64));
        let mut words = Vec::new();
        for _ in 0..42 {
            words.push(s.next_bits(64).unwrap());
        }
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        assert_eq!(bytes, super::super::sponge::shake128(b"q", 336));
    }
}
