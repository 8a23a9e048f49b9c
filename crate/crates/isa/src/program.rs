//! Program text and validation.
//!
//! One instruction per line:
//!
//! ```text
//! OPCODE operands... key=value... [;par] [;loop]   # comment
//! ```
//!
//! A polynomial operand is two locations `bB:W` (low half, high half), a
//! byte buffer is `bB:W/LEN`. `;par` issues the line together with the
//! previous one; `;loop` marks the target of the signing loop's back edge.

use std::fmt;
use std::str::FromStr;

use crate::error::IsaError;
use crate::instr::{ByteLoc, Control, Instruction, Loc, Operand, PolyLoc};
use crate::opcode::{Opcode, PackCode, Param, SlotKind};

/// A validated instruction sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    instrs: Vec<Instruction>,
}

impl Program {
    /// Validates a sequence built in code. Errors report 1-based
    /// instruction positions as line numbers.
    pub fn new(instrs: Vec<Instruction>) -> Result<Self, IsaError> {
        for (i, ins) in instrs.iter().enumerate() {
            check_instruction(ins, i + 1)?;
        }
        check_pairs(&instrs, &(1..=instrs.len()).collect::<Vec<_>>())?;
        Ok(Self { instrs })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Index of the instruction carrying the loop mark, if any.
    pub fn loop_start(&self) -> Option<usize> {
        self.instrs.iter().position(|i| i.control.loop_start())
    }

    /// Number of paired issue slots.
    pub fn pairs(&self) -> usize {
        self.instrs.iter().filter(|i| i.control.par()).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in &self.instrs {
            s.push_str(&i.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Program {
    type Err = IsaError;

    fn from_str(s: &str) -> Result<Self, IsaError> {
        load_program(s)
    }
}

/// Parses and validates program text.
pub fn load_program(text: &str) -> Result<Program, IsaError> {
    let mut instrs = Vec::new();
    let mut lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let ins = parse_line(body, line)?;
        check_instruction(&ins, line)?;
        instrs.push(ins);
        lines.push(line);
    }
    check_pairs(&instrs, &lines)?;
    Ok(Program { instrs })
}

fn syntax(line: usize, detail: impl Into<String>) -> IsaError {
    IsaError::Syntax {
        line,
        detail: detail.into(),
    }
}

fn parse_loc(tok: &str, line: usize) -> Result<Loc, IsaError> {
    let bad = || syntax(line, format!("bad location `{tok}`"));
    let rest = tok.strip_prefix('b').ok_or_else(bad)?;
    let (bank, word) = rest.split_once(':').ok_or_else(bad)?;
    let bank: u8 = bank.parse().map_err(|_| bad())?;
    let word: u32 = word.parse().map_err(|_| bad())?;
    if bank as usize >= crate::memory::BANKS || word > u16::MAX as u32 {
        return Err(IsaError::AddressOutOfRange {
            line,
            operand: tok.to_string(),
        });
    }
    Ok(Loc::new(bank, word as u16))
}

fn parse_value(key: Param, v: &str, line: usize) -> Result<u32, IsaError> {
    if key == Param::Kind {
        return PackCode::parse(v)
            .map(|k| k as u32)
            .ok_or_else(|| syntax(line, format!("unknown pack kind `{v}`")));
    }
    let parsed = match v.strip_prefix("0x") {
        Some(h) => u32::from_str_radix(h, 16),
        None => v.parse(),
    };
    parsed.map_err(|_| syntax(line, format!("bad value `{v}` for {}", key.name())))
}

fn parse_line(body: &str, line: usize) -> Result<Instruction, IsaError> {
    let mut control = 0u8;
    let mut main = body;
    if let Some(pos) = body.find(';') {
        main = &body[..pos];
        for flag in body[pos..].split(';').map(str::trim).filter(|f| !f.is_empty()) {
            match flag {
                "par" => control |= Control::PAR,
                "loop" => control |= Control::LOOP,
                other => return Err(syntax(line, format!("unknown flag `;{other}`"))),
            }
        }
    }
    let mut toks = main.split_whitespace();
    let name = toks.next().ok_or_else(|| syntax(line, "missing opcode"))?;
    let opcode: Opcode = name.parse().map_err(|_| IsaError::UnknownOpcode {
        line,
        name: name.to_string(),
    })?;
    let mut operands = Vec::new();
    let mut params = Vec::new();
    let mut pending: Option<Loc> = None;
    for tok in toks {
        if let Some((k, v)) = tok.split_once('=') {
            let key: Param = k.parse().map_err(|_| syntax(line, format!("unknown parameter `{k}`")))?;
            params.push((key, parse_value(key, v, line)?));
        } else if let Some((loc, len)) = tok.split_once('/') {
            if pending.is_some() {
                return Err(syntax(line, "polynomial operand needs two locations"));
            }
            let len: u32 = len.parse().map_err(|_| syntax(line, format!("bad length in `{tok}`")))?;
            let at = parse_loc(loc, line)?;
            operands.push(Operand::Bytes(ByteLoc { at, len }));
        } else {
            let loc = parse_loc(tok, line)?;
            match pending.take() {
                None => pending = Some(loc),
                Some(lo) => operands.push(Operand::Poly(PolyLoc::new(lo, loc))),
            }
        }
    }
    if pending.is_some() {
        return Err(syntax(line, "polynomial operand needs two locations"));
    }
    Ok(Instruction {
        opcode,
        operands,
        params,
        control: Control(control),
    })
}

/// Shape, range and parameter checks for one instruction.
fn check_instruction(ins: &Instruction, line: usize) -> Result<(), IsaError> {
    let op = ins.opcode;
    let shape = op.shape();
    let n = ins.operands.len();
    if n > shape.slots.len() || n + shape.optional_slots < shape.slots.len() {
        return Err(syntax(line, format!("{op} takes {} operands, got {n}", shape.slots.len())));
    }
    for (i, (operand, slot)) in ins.operands.iter().zip(shape.slots).enumerate() {
        if slot.kind != SlotKind::Any && slot.kind != operand.kind() {
            return Err(syntax(line, format!("{op} operand {} has the wrong kind", i + 1)));
        }
        if let Operand::Poly(p) = operand {
            if p.lo.bank == p.hi.bank {
                return Err(syntax(line, format!("{op} operand {} keeps both halves in bank {}", i + 1, p.lo.bank)));
            }
        }
        if let Operand::Bytes(b) = operand {
            if b.len == 0 {
                return Err(syntax(line, format!("{op} operand {} is empty", i + 1)));
            }
        }
    }
    if let Some(operand) = ins.out_of_range() {
        return Err(IsaError::AddressOutOfRange { line, operand });
    }

    for (i, (k, _)) in ins.params.iter().enumerate() {
        if !shape.required.contains(k) && !shape.optional.contains(k) {
            return Err(syntax(line, format!("{op} does not take `{}`", k.name())));
        }
        if ins.params[..i].iter().any(|(p, _)| p == k) {
            return Err(syntax(line, format!("`{}` given twice", k.name())));
        }
    }
    for k in shape.required {
        if ins.param(*k).is_none() {
            return Err(syntax(line, format!("{op} needs `{}`", k.name())));
        }
    }
    let need = |k: Param| -> Result<u32, IsaError> { ins.param(k).ok_or_else(|| syntax(line, format!("{op} needs `{}`", k.name()))) };
    if let Some(q) = ins.param(Param::Q) {
        if !(23..=25).contains(&q) {
            return Err(syntax(line, format!("q={q}: supported primes are 23, 24 and 25 bits")));
        }
    }
    match op {
        Opcode::VerifyDil => {
            if ins.operands.is_empty() {
                need(Param::Omega)?;
            } else {
                need(Param::Bound)?;
            }
        }
        Opcode::Ntt | Opcode::Intt => {
            if let Some(src) = ins.operands.get(1) {
                if src.poly().banks() != ins.operands[0].poly().banks() {
                    return Err(syntax(line, format!("{op} must stay within one bank pair")));
                }
            }
        }
        Opcode::Padd | Opcode::Psub => {
            if ins.param(Param::Q).is_some() == ins.param(Param::M).is_some() {
                return Err(syntax(line, format!("{op} needs exactly one of `q` and `m`")));
            }
        }
        Opcode::Copy => {
            let (a, b) = (&ins.operands[0], &ins.operands[1]);
            let same = match (a, b) {
                (Operand::Poly(_), Operand::Poly(_)) => true,
                (Operand::Bytes(x), Operand::Bytes(y)) => x.len == y.len,
                _ => false,
            };
            if !same {
                return Err(syntax(line, "COPY operands differ in kind or size"));
            }
        }
        Opcode::Verify | Opcode::Cmov => {
            if ins.operands[0].bytes().len != ins.operands[1].bytes().len {
                return Err(syntax(line, format!("{op} operands differ in size")));
            }
        }
        Opcode::ShakeReset => {
            let h = need(Param::Hash)?;
            let w = need(Param::Width)?;
            if h != 128 && h != 256 {
                return Err(syntax(line, "hash must be 128 or 256"));
            }
            if !(1..=32).contains(&w) {
                return Err(syntax(line, "width must be 1..=32"));
            }
        }
        Opcode::PackHint | Opcode::UnpackHint => {
            if need(Param::N)? == 0 {
                return Err(syntax(line, "n must be positive"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// `;par` must join two different lanes, and a line can be in one pair only.
fn check_pairs(instrs: &[Instruction], lines: &[usize]) -> Result<(), IsaError> {
    let mut loops = 0;
    for (i, ins) in instrs.iter().enumerate() {
        if ins.control.loop_start() {
            loops += 1;
            if loops > 1 {
                return Err(syntax(lines[i], "only one loop mark is allowed"));
            }
        }
        if ins.is_branch() && !instrs[..=i].iter().any(|x| x.control.loop_start()) {
            return Err(syntax(lines[i], "loop exit test without a preceding ;loop mark"));
        }
        if !ins.control.par() {
            continue;
        }
        if i == 0 || instrs[i - 1].control.par() {
            return Err(syntax(lines[i], ";par needs an unpaired instruction on the previous line"));
        }
        let prev = &instrs[i - 1];
        if prev.lane() == ins.lane() {
            return Err(IsaError::LaneViolation {
                line: lines[i],
                first: prev.opcode.to_string(),
                second: ins.opcode.to_string(),
                lane: ins.lane().to_string(),
            });
        }
        if ins.control.loop_start() {
            return Err(syntax(lines[i], "the loop mark must be on the first line of a slot"));
        }
    }
    Ok(())
}
