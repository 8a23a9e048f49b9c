//! Cycle costs per opcode.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use pqproc_core::keccak::HashMode;

use crate::error::IsaError;
use crate::instr::{Instruction, Operand};
use crate::memory::HALF_WORDS;
use crate::opcode::{Opcode, Param};

/// Cycles of one transform over a full polynomial.
pub const TRANSFORM_CYCLES: u32 = 512;
/// Cycles to decompose one polynomial.
pub const DECOMPOSE_CYCLES: u32 = 128;

/// Opcodes whose cost is pinned and never refitted.
pub const FIXED: [(Opcode, u32); 3] = [
    (Opcode::Ntt, TRANSFORM_CYCLES),
    (Opcode::Intt, TRANSFORM_CYCLES),
    (Opcode::Decompose, DECOMPOSE_CYCLES),
];

const SHIPPED: &str = include_str!("../calibration/costs.txt");

/// Cycles per work unit for each opcode. An instruction costs
/// `per_unit × units`, at least one cycle; see [`units`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostTable {
    per_unit: BTreeMap<Opcode, u32>,
}

/// Keccak permutations for a one-shot hash of `input` bytes producing
/// `output` bytes.
fn permutations(rate: usize, input: usize, output: usize) -> u64 {
    (input / rate + output.div_ceil(rate).max(1)) as u64
}

/// Work units of an instruction: Keccak permutations for the hash
/// opcodes, words for byte moves and comparisons, polynomials for the
/// rest. The loop exit test has no data work.
pub fn units(ins: &Instruction) -> u64 {
    let bytes = |i: usize| ins.operands[i].bytes().len as usize;
    match ins.opcode {
        Opcode::Sha3_256 => permutations(136, bytes(1), 32),
        Opcode::Sha3_512 => permutations(72, bytes(1), 64),
        Opcode::Shake128 => permutations(HashMode::Shake128.rate(), bytes(1), bytes(0)),
        Opcode::Shake256 => permutations(HashMode::Shake256.rate(), bytes(1), bytes(0)),
        Opcode::ShakeReset => {
            let rate = if ins.param(Param::Hash) == Some(128) { 168 } else { 136 };
            (bytes(0) / rate + 1) as u64
        }
        Opcode::ShakeResume => bytes(0).div_ceil(136) as u64,
        Opcode::Copy | Opcode::Cmov | Opcode::Verify => match ins.operands[0] {
            Operand::Poly(_) => 2 * HALF_WORDS as u64,
            Operand::Bytes(b) => b.words() as u64,
        },
        Opcode::PackHint | Opcode::UnpackHint => ins.poly_count() as u64,
        Opcode::VerifyDil if ins.is_branch() => 0,
        _ => 1,
    }
}

impl CostTable {
    /// The fitted table shipped with the crate.
    pub fn shipped() -> Self {
        SHIPPED.parse().expect("shipped cost table is valid")
    }

    /// Every free opcode at `v` cycles per unit; pinned opcodes keep
    /// their values.
    pub fn uniform(v: u32) -> Self {
        let mut per_unit: BTreeMap<Opcode, u32> = Opcode::ALL.iter().map(|&o| (o, v.max(1))).collect();
        for (o, c) in FIXED {
            per_unit.insert(o, c);
        }
        Self { per_unit }
    }

    /// Builds a table, enforcing the pinned values and a floor of one.
    pub fn from_map(per_unit: BTreeMap<Opcode, u32>) -> Result<Self, IsaError> {
        for &o in Opcode::ALL {
            match per_unit.get(&o) {
                None => return Err(IsaError::CostTable(format!("no cost for {o}"))),
                Some(0) => return Err(IsaError::CostTable(format!("{o} costs zero cycles"))),
                Some(_) => {}
            }
        }
        for (o, c) in FIXED {
            if per_unit[&o] != c {
                return Err(IsaError::CostTable(format!("{o} is pinned at {c} cycles, got {}", per_unit[&o])));
            }
        }
        Ok(Self { per_unit })
    }

    pub fn per_unit(&self, op: Opcode) -> u32 {
        self.per_unit[&op]
    }

    pub fn entries(&self) -> impl Iterator<Item = (Opcode, u32)> + '_ {
        self.per_unit.iter().map(|(&o, &c)| (o, c))
    }

    /// Cycles taken by one instruction.
    pub fn cost(&self, ins: &Instruction) -> u64 {
        (self.per_unit(ins.opcode) as u64 * units(ins)).max(1)
    }
}

impl Default for CostTable {
    fn default() -> Self {
        Self::shipped()
    }
}

impl fmt::Display for CostTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# opcode cycles_per_unit")?;
        for (o, c) in &self.per_unit {
            writeln!(f, "{} {}", o.mnemonic(), c)?;
        }
        Ok(())
    }
}

impl FromStr for CostTable {
    type Err = IsaError;

    /// `OPCODE CYCLES` per line; `#` starts a comment.
    fn from_str(s: &str) -> Result<Self, IsaError> {
        let mut map = BTreeMap::new();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(name), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(IsaError::CostTable(format!("line {}: expected `OPCODE CYCLES`", n + 1)));
            };
            let op: Opcode = name
                .parse()
                .map_err(|_| IsaError::CostTable(format!("line {}: unknown opcode {name}", n + 1)))?;
            let v: u32 = v
                .parse()
                .map_err(|_| IsaError::CostTable(format!("line {}: bad cycle count {v}", n + 1)))?;
            if map.insert(op, v).is_some() {
                return Err(IsaError::CostTable(format!("line {}: {name} listed twice", n + 1)));
            }
        }
        Self::from_map(map)
    }
}
