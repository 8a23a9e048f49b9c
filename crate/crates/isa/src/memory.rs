//! Four-bank data memory plus the twiddle and instruction regions.

use pqproc_core::ntt::TwiddleTable;
use pqproc_core::{PrimeCtx, N};

use crate::error::IsaError;
use crate::instr::{ByteLoc, PolyLoc};
use crate::program::Program;

pub const BANKS: usize = 4;
pub const WORDS_PER_BANK: usize = 8192;
/// Words holding one half (128 coefficients) of a polynomial.
pub const HALF_WORDS: usize = N / 4;

/// Data banks of 64-bit words, a read-only twiddle region and the
/// instruction RAM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Memory {
    banks: Vec<Vec<u64>>,
    constants: Vec<u64>,
    instructions: Vec<u64>,
}

impl Default for Memory {
    fn default() -> Self {
        Self::new()
    }
}

impl Memory {
    /// Zeroed banks; the constants region holds the forward twiddles of
    /// the three supported primes, two per word.
    pub fn new() -> Self {
        let mut constants = Vec::with_capacity(3 * N / 2);
        for ctx in [PrimeCtx::q23(), PrimeCtx::q24(), PrimeCtx::q25()] {
            let t = TwiddleTable::cached(ctx);
            let psi = t.psi();
            let w: Vec<u32> = (0..N).map(|k| ctx.pow(psi, bitrev8(k) as u64)).collect();
            for pair in w.chunks(2) {
                constants.push(pair[0] as u64 | (pair[1] as u64) << 32);
            }
        }
        Self {
            banks: vec![vec![0; WORDS_PER_BANK]; BANKS],
            constants,
            instructions: Vec::new(),
        }
    }

    pub fn bank(&self, b: usize) -> &[u64] {
        &self.banks[b]
    }

    pub fn bank_mut(&mut self, b: usize) -> &mut [u64] {
        &mut self.banks[b]
    }

    pub fn constants(&self) -> &[u64] {
        &self.constants
    }

    pub fn instructions(&self) -> &[u64] {
        &self.instructions
    }

    /// Stores the encoded program in the instruction RAM.
    pub fn load_instructions(&mut self, program: &Program) {
        self.instructions = program.instructions().iter().flat_map(|i| i.encode()).collect();
    }

    /// Data banks only; the regions outside the banks are not compared.
    pub fn same_data(&self, other: &Memory) -> bool {
        self.banks == other.banks
    }

    pub fn read_poly(&self, p: PolyLoc) -> [u32; N] {
        let mut out = [0u32; N];
        for (half, loc) in [p.lo, p.hi].into_iter().enumerate() {
            let words = &self.banks[loc.bank as usize][loc.word as usize..loc.word as usize + HALF_WORDS];
            for (k, &w) in words.iter().enumerate() {
                out[half * 128 + 2 * k] = w as u32;
                out[half * 128 + 2 * k + 1] = (w >> 32) as u32;
            }
        }
        out
    }

    pub fn write_poly(&mut self, p: PolyLoc, c: &[u32; N]) {
        for (half, loc) in [p.lo, p.hi].into_iter().enumerate() {
            let words = &mut self.banks[loc.bank as usize][loc.word as usize..loc.word as usize + HALF_WORDS];
            for (k, w) in words.iter_mut().enumerate() {
                *w = c[half * 128 + 2 * k] as u64 | (c[half * 128 + 2 * k + 1] as u64) << 32;
            }
        }
    }

    pub fn read_bytes(&self, b: ByteLoc) -> Vec<u8> {
        let words = &self.banks[b.at.bank as usize][b.at.word as usize..b.at.word as usize + b.words()];
        let mut out: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(b.len as usize);
        out
    }

    /// Writes `data` (which must be `b.len` bytes). Bytes of the last
    /// word beyond the buffer are preserved.
    pub fn write_bytes(&mut self, b: ByteLoc, data: &[u8]) -> Result<(), IsaError> {
        if data.len() != b.len as usize {
            return Err(IsaError::Execution(format!("buffer {}/{} given {} bytes", b.at, b.len, data.len())));
        }
        let words = &mut self.banks[b.at.bank as usize][b.at.word as usize..b.at.word as usize + b.words()];
        for (w, chunk) in words.iter_mut().zip(data.chunks(8)) {
            let mut bytes = w.to_le_bytes();
            bytes[..chunk.len()].copy_from_slice(chunk);
            *w = u64::from_le_bytes(bytes);
        }
        Ok(())
    }
}

fn bitrev8(k: usize) -> usize {
    (k as u8).reverse_bits() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instr::Loc;

    #[test]
    fn poly_layout() {
        let mut m = Memory::new();
        let p = PolyLoc::new(Loc::new(0, 10), Loc::new(1, 20));
        let c: [u32; N] = std::array::from_fn(|i| i as u32 * 3 + 1);
        m.write_poly(p, &c);
        assert_eq!(m.read_poly(p), c);
        assert_eq!(m.bank(0)[10], 1 | 4 << 32);
        assert_eq!(m.bank(1)[20], (128 * 3 + 1) | ((129 * 3 + 1) as u64) << 32);
        assert_eq!(m.bank(1)[20 + 63], (254 * 3 + 1) | ((255 * 3 + 1) as u64) << 32);
        assert_eq!(m.bank(0)[9], 0);
        assert_eq!(m.bank(0)[74], 0);
    }

    #[test]
    fn partial_word_is_preserved() {
        let mut m = Memory::new();
        m.bank_mut(2)[4] = u64::MAX;
        let b = ByteLoc::new(2, 0, 34);
        let data: Vec<u8> = (0..34).collect();
        m.write_bytes(b, &data).unwrap();
        assert_eq!(m.read_bytes(b), data);
        assert_eq!(m.bank(2)[4] >> 16, u64::MAX >> 16);
        assert!(m.write_bytes(b, &data[..3]).is_err());
    }

    #[test]
    fn twiddle_region() {
        let m = Memory::new();
        assert_eq!(m.constants().len(), 384);
        // Entry 0 of every table is psi^0 = 1.
        assert_eq!(m.constants()[0] as u32, 1);
        assert_eq!(m.constants()[128] as u32, 1);
        let q23 = PrimeCtx::q23();
        assert_eq!((m.constants()[0] >> 32) as u32, q23.pow(1753, 128));
    }
}
