//! Random valid programs and memory images, for property tests and
//! fuzzing the scheduler.

use rand::Rng;

use crate::instr::{ByteLoc, Control, Instruction, Loc, Operand, PolyLoc};
use crate::memory::{Memory, BANKS};
use crate::opcode::{Opcode, Param};
use crate::program::Program;
use crate::sim::pair_conflict;

/// Mostly in banks 0 and 1, so that byte operands in banks 2 and 3 can
/// pair with them.
fn poly(rng: &mut impl Rng) -> PolyLoc {
    let (lo, hi) = if rng.gen_bool(0.7) {
        (0, 1)
    } else {
        let lo = rng.gen_range(0..4u8);
        (lo, (lo + rng.gen_range(1..4u8)) % 4)
    };
    let slot = rng.gen_range(0..6u16) * 64;
    PolyLoc::new(Loc::new(lo, slot), Loc::new(hi, slot))
}

/// A polynomial inside the bank pair starting at `lo`, as the transforms
/// require.
fn paired(rng: &mut impl Rng, lo: u8) -> PolyLoc {
    let slot = rng.gen_range(0..6u16) * 64;
    PolyLoc::new(Loc::new(lo, slot), Loc::new(lo + 1, slot))
}

fn bytes(rng: &mut impl Rng, len: u32) -> ByteLoc {
    let bank = if rng.gen_bool(0.7) { rng.gen_range(2..4u8) } else { rng.gen_range(0..4u8) };
    ByteLoc::new(bank, 1024 + rng.gen_range(0..8u16) * 8, len)
}

/// One instruction that executes on any memory contents.
pub fn random_instruction(rng: &mut impl Rng) -> Instruction {
    let p = Operand::Poly;
    let b = Operand::Bytes;
    let q = vec![(Param::Q, 23)];
    match rng.gen_range(0..11) {
        0 => Instruction::new(Opcode::Shake128, vec![b(bytes(rng, 32)), b(bytes(rng, 32))], vec![]),
        1 => Instruction::new(Opcode::Shake256, vec![b(bytes(rng, 64)), b(bytes(rng, 32))], vec![]),
        2 => Instruction::new(Opcode::Sha3_256, vec![b(bytes(rng, 32)), b(bytes(rng, 40))], vec![]),
        3 => Instruction::new(Opcode::Refresh, vec![p(poly(rng))], vec![]),
        4 => {
            let v = rng.gen_range(0..1000);
            Instruction::new(Opcode::Write, vec![b(bytes(rng, 2))], vec![(Param::Value, v)])
        }
        5 => {
            let lo = 2 * rng.gen_range(0..2u8);
            let ops = if rng.gen() { vec![p(paired(rng, lo)), p(paired(rng, lo))] } else { vec![p(paired(rng, lo))] };
            Instruction::new(Opcode::Ntt, ops, q)
        }
        6 => {
            let lo = 2 * rng.gen_range(0..2u8);
            Instruction::new(Opcode::Intt, vec![p(paired(rng, lo))], q)
        }
        7 => Instruction::new(Opcode::Pmul, vec![p(poly(rng)), p(poly(rng)), p(poly(rng))], q),
        8 => Instruction::new(Opcode::Padd, vec![p(poly(rng)), p(poly(rng)), p(poly(rng))], q),
        9 => Instruction::new(Opcode::Psub, vec![p(poly(rng)), p(poly(rng)), p(poly(rng))], vec![(Param::M, 13)]),
        _ => Instruction::new(Opcode::Copy, vec![p(poly(rng)), p(poly(rng))], vec![]),
    }
}

/// A program of `len` instructions with `;par` set wherever a pair is
/// legal and a coin (probability 0.8) says so.
pub fn random_program(rng: &mut impl Rng, len: usize) -> Program {
    let mut out: Vec<Instruction> = Vec::new();
    for _ in 0..len {
        let mut ins = random_instruction(rng);
        if let Some(prev) = out.last() {
            let free = !prev.control.par() && prev.opcode.lane() != ins.opcode.lane();
            if free && pair_conflict(prev, &ins).is_none() && rng.gen_bool(0.8) {
                ins.control = Control(ins.control.0 | Control::PAR);
            }
        }
        out.push(ins);
    }
    Program::new(out).expect("generated program is valid")
}

/// Memory with the first 2048 words of every bank random.
pub fn random_memory(rng: &mut impl Rng) -> Memory {
    let mut m = Memory::new();
    for b in 0..BANKS {
        rng.fill(&mut m.bank_mut(b)[..2048]);
    }
    m
}
