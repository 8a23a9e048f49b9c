//! Instructions, operands and the binary encoding.

use std::fmt;
use std::ops::Range;

use crate::memory::{BANKS, HALF_WORDS, WORDS_PER_BANK};
use crate::opcode::{Access, Lane, Opcode, PackCode, Param, SlotKind};

/// A word address inside one bank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loc {
    pub bank: u8,
    pub word: u16,
}

impl Loc {
    pub fn new(bank: u8, word: u16) -> Self {
        Self { bank, word }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}:{}", self.bank, self.word)
    }
}

/// A polynomial stored as two 64-word halves: coefficients 0..128 at `lo`,
/// 128..256 at `hi`. Each word holds two coefficients, the even one in the
/// low 32 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolyLoc {
    pub lo: Loc,
    pub hi: Loc,
}

impl PolyLoc {
    pub fn new(lo: Loc, hi: Loc) -> Self {
        Self { lo, hi }
    }

    /// The `k`-th polynomial of a vector laid out at a 64-word stride.
    pub fn offset(&self, k: usize) -> PolyLoc {
        let step = (k * HALF_WORDS) as u16;
        PolyLoc {
            lo: Loc::new(self.lo.bank, self.lo.word + step),
            hi: Loc::new(self.hi.bank, self.hi.word + step),
        }
    }

    pub fn banks(&self) -> [u8; 2] {
        [self.lo.bank, self.hi.bank]
    }
}

/// `len` bytes packed little-endian, eight per word, from `at` onwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ByteLoc {
    pub at: Loc,
    pub len: u32,
}

impl ByteLoc {
    pub fn new(bank: u8, word: u16, len: u32) -> Self {
        Self {
            at: Loc::new(bank, word),
            len,
        }
    }

    pub fn words(&self) -> usize {
        (self.len as usize).div_ceil(8)
    }

    /// The sub-buffer starting `offset` bytes in; `offset` must be a
    /// multiple of 8.
    pub fn slice(&self, offset: u32, len: u32) -> ByteLoc {
        assert!(offset % 8 == 0 && offset + len <= self.len, "unaligned or out of range slice");
        ByteLoc::new(self.at.bank, self.at.word + (offset / 8) as u16, len)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Poly(PolyLoc),
    Bytes(ByteLoc),
}

impl Operand {
    pub fn kind(&self) -> SlotKind {
        match self {
            Operand::Poly(_) => SlotKind::Poly,
            Operand::Bytes(_) => SlotKind::Bytes,
        }
    }

    pub fn poly(&self) -> PolyLoc {
        match self {
            Operand::Poly(p) => *p,
            Operand::Bytes(_) => panic!("operand is a byte buffer"),
        }
    }

    pub fn bytes(&self) -> ByteLoc {
        match self {
            Operand::Bytes(b) => *b,
            Operand::Poly(_) => panic!("operand is a polynomial"),
        }
    }

    /// Word ranges touched when the operand spans `count` polynomials.
    pub fn ranges(&self, count: usize) -> Vec<(u8, Range<usize>)> {
        match self {
            Operand::Poly(p) => {
                let w = HALF_WORDS * count;
                vec![
                    (p.lo.bank, p.lo.word as usize..p.lo.word as usize + w),
                    (p.hi.bank, p.hi.word as usize..p.hi.word as usize + w),
                ]
            }
            Operand::Bytes(b) => vec![(b.at.bank, b.at.word as usize..b.at.word as usize + b.words())],
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Poly(p) => write!(f, "{} {}", p.lo, p.hi),
            Operand::Bytes(b) => write!(f, "{}/{}", b.at, b.len),
        }
    }
}

/// The 4-bit control field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Control(pub u8);

impl Control {
    /// Issue together with the preceding instruction.
    pub const PAR: u8 = 0b0001;
    /// Target of the signing loop's back edge.
    pub const LOOP: u8 = 0b0010;

    pub fn par(self) -> bool {
        self.0 & Self::PAR != 0
    }

    pub fn loop_start(self) -> bool {
        self.0 & Self::LOOP != 0
    }
}

/// One instruction with its operands and parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub opcode: Opcode,
    pub operands: Vec<Operand>,
    pub params: Vec<(Param, u32)>,
    pub control: Control,
}

/// A single memory footprint entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Footprint {
    pub bank: u8,
    pub words: Range<usize>,
    pub access: Access,
}

/// Internal state shared between instructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Register {
    /// The streaming Keccak session.
    Keccak,
    /// Signing attempt counter.
    Kappa,
    /// Running hint weight.
    Hints,
    /// Sticky rejection flag.
    Reject,
    /// Result of the last byte comparison.
    Cmp,
}

impl Instruction {
    pub fn new(opcode: Opcode, operands: Vec<Operand>, params: Vec<(Param, u32)>) -> Self {
        Self {
            opcode,
            operands,
            params,
            control: Control::default(),
        }
    }

    pub fn lane(&self) -> Lane {
        self.opcode.lane()
    }

    pub fn param(&self, p: Param) -> Option<u32> {
        self.params.iter().find(|(k, _)| *k == p).map(|&(_, v)| v)
    }

    /// The loop back edge (a `VERIFY_DIL` with no operand).
    pub fn is_branch(&self) -> bool {
        self.opcode == Opcode::VerifyDil && self.operands.is_empty()
    }

    /// Number of polynomials a polynomial operand spans.
    pub fn poly_count(&self) -> usize {
        match self.opcode {
            Opcode::PackHint | Opcode::UnpackHint => self.param(Param::N).unwrap_or(1) as usize,
            _ => 1,
        }
    }

    fn access(&self, idx: usize) -> Access {
        let base = self.opcode.shape().slots[idx].access;
        if idx == 0 && self.opcode == Opcode::Pmul && self.param(Param::Acc).unwrap_or(0) != 0 {
            return Access::ReadWrite;
        }
        base
    }

    /// Every memory range the instruction touches.
    pub fn footprint(&self) -> Vec<Footprint> {
        let count = self.poly_count();
        let mut out = Vec::new();
        for (i, op) in self.operands.iter().enumerate() {
            let access = self.access(i);
            for (bank, words) in op.ranges(count) {
                out.push(Footprint { bank, words, access });
            }
        }
        out
    }

    /// Banks whose read port (index 0) or write port (index 1) is busy
    /// while the instruction runs.
    pub fn ports(&self) -> [[bool; BANKS]; 2] {
        let mut p = [[false; BANKS]; 2];
        for f in self.footprint() {
            if f.access.reads() {
                p[0][f.bank as usize] = true;
            }
            if f.access.writes() {
                p[1][f.bank as usize] = true;
            }
        }
        p
    }

    /// Registers read and written.
    pub fn registers(&self) -> (Vec<Register>, Vec<Register>) {
        use Register::*;
        match self.opcode {
            Opcode::ResetKeccak | Opcode::ShakeReset => (vec![], vec![Keccak]),
            Opcode::ShakeResume | Opcode::Shake128W26 | Opcode::Binomial => (vec![Keccak], vec![Keccak]),
            Opcode::VerifyDil if self.is_branch() => (vec![Reject, Hints, Kappa], vec![Reject, Kappa]),
            Opcode::VerifyDil | Opcode::UnpackHint => (vec![Reject], vec![Reject]),
            Opcode::Write => (vec![Kappa], vec![]),
            Opcode::MakeHint => (vec![Hints], vec![Hints]),
            Opcode::CounterRef => (vec![], vec![Hints]),
            Opcode::Verify => (vec![], vec![Cmp]),
            Opcode::Cmov => (vec![Cmp], vec![]),
            _ => (vec![], vec![]),
        }
    }

    /// Binary form: a header word, one word per operand, one per parameter.
    ///
    /// Header: bits 0..8 opcode id, 8..12 control, 12..16 operand count,
    /// 16..24 parameter count. Polynomial operand: bits 0..2 = 0, 2..4 low
    /// bank, 4..20 low word, 20..22 high bank, 22..38 high word. Byte
    /// operand: bits 0..2 = 1, 2..4 bank, 4..20 word, 20..52 length.
    /// Parameter: bits 0..8 id, 8..40 value.
    pub fn encode(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(1 + self.operands.len() + self.params.len());
        out.push(
            self.opcode.id() as u64
                | ((self.control.0 as u64 & 0xf) << 8)
                | ((self.operands.len() as u64) << 12)
                | ((self.params.len() as u64) << 16),
        );
        for op in &self.operands {
            out.push(match op {
                Operand::Poly(p) => {
                    ((p.lo.bank as u64) << 2) | ((p.lo.word as u64) << 4) | ((p.hi.bank as u64) << 20) | ((p.hi.word as u64) << 22)
                }
                Operand::Bytes(b) => 1 | ((b.at.bank as u64) << 2) | ((b.at.word as u64) << 4) | ((b.len as u64) << 20),
            });
        }
        for &(k, v) in &self.params {
            out.push(k.id() as u64 | ((v as u64) << 8));
        }
        out
    }

    /// Inverse of [`Instruction::encode`]; returns the instruction and the
    /// number of words consumed.
    pub fn decode(words: &[u64]) -> Option<(Instruction, usize)> {
        let head = *words.first()?;
        let opcode = Opcode::from_id((head & 0xff) as u8)?;
        let control = Control(((head >> 8) & 0xf) as u8);
        let n_ops = ((head >> 12) & 0xf) as usize;
        let n_params = ((head >> 16) & 0xff) as usize;
        let body = words.get(1..1 + n_ops + n_params)?;
        let mut operands = Vec::with_capacity(n_ops);
        for &w in &body[..n_ops] {
            let bank = ((w >> 2) & 3) as u8;
            let word = ((w >> 4) & 0xffff) as u16;
            operands.push(match w & 3 {
                0 => Operand::Poly(PolyLoc::new(Loc::new(bank, word), Loc::new(((w >> 20) & 3) as u8, ((w >> 22) & 0xffff) as u16))),
                1 => Operand::Bytes(ByteLoc::new(bank, word, ((w >> 20) & 0xffff_ffff) as u32)),
                _ => return None,
            });
        }
        let mut params = Vec::with_capacity(n_params);
        for &w in &body[n_ops..] {
            params.push((Param::from_id((w & 0xff) as u8)?, ((w >> 8) & 0xffff_ffff) as u32));
        }
        Some((
            Instruction {
                opcode,
                operands,
                params,
                control,
            },
            1 + n_ops + n_params,
        ))
    }

    /// Checks that every operand lies inside its bank.
    pub(crate) fn out_of_range(&self) -> Option<String> {
        let count = self.poly_count();
        for op in &self.operands {
            for (bank, words) in op.ranges(count) {
                if bank as usize >= BANKS || words.end > WORDS_PER_BANK {
                    return Some(op.to_string());
                }
            }
        }
        None
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.opcode.mnemonic())?;
        for op in &self.operands {
            write!(f, " {op}")?;
        }
        for &(k, v) in &self.params {
            match (k, PackCode::from_code(v)) {
                (Param::Kind, Some(code)) => write!(f, " {}={}", k.name(), code.name())?,
                _ => write!(f, " {}={}", k.name(), v)?,
            }
        }
        if self.control.par() {
            f.write_str(" ;par")?;
        }
        if self.control.loop_start() {
            f.write_str(" ;loop")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips() {
        let mut i = Instruction::new(
            Opcode::Pmul,
            vec![
                Operand::Poly(PolyLoc::new(Loc::new(0, 128), Loc::new(1, 128))),
                Operand::Poly(PolyLoc::new(Loc::new(2, 0), Loc::new(3, 8000))),
                Operand::Poly(PolyLoc::new(Loc::new(0, 0), Loc::new(1, 0))),
            ],
            vec![(Param::Q, 25), (Param::Acc, 1)],
        );
        i.control = Control(Control::PAR | Control::LOOP);
        let words = i.encode();
        assert_eq!(words.len(), 6);
        assert_eq!(Instruction::decode(&words), Some((i, 6)));

        let b = Instruction::new(Opcode::Sha3_512, vec![Operand::Bytes(ByteLoc::new(2, 5, 64)), Operand::Bytes(ByteLoc::new(3, 7, 3041))], vec![]);
        assert_eq!(Instruction::decode(&b.encode()), Some((b, 3)));
    }

    #[test]
    fn accumulate_reads_destination() {
        let p = |b: u8| Operand::Poly(PolyLoc::new(Loc::new(b, 0), Loc::new(b + 1, 0)));
        let plain = Instruction::new(Opcode::Pmul, vec![p(0), p(2), p(2)], vec![(Param::Q, 23)]);
        assert_eq!(plain.ports(), [[false, false, true, true], [true, true, false, false]]);
        let acc = Instruction::new(Opcode::Pmul, vec![p(0), p(2), p(2)], vec![(Param::Q, 23), (Param::Acc, 1)]);
        assert_eq!(acc.ports(), [[true, true, true, true], [true, true, false, false]]);
    }

    #[test]
    fn byte_words_round_up() {
        assert_eq!(ByteLoc::new(0, 0, 34).words(), 5);
        assert_eq!(ByteLoc::new(0, 0, 32).words(), 4);
        assert_eq!(ByteLoc::new(0, 10, 64).slice(32, 32), ByteLoc::new(0, 14, 32));
    }
}
