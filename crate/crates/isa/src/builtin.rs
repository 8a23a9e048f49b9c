//! Protocol programs for Saber and Dilithium.
//!
//! Each program is written as straight-line code and then packed into
//! issue slots by [`schedule`]: the Set-1 and Set-2 instruction streams keep
//! their order, cross-lane dependencies are respected, and a Set-1 and a
//! Set-2 instruction share a slot whenever the pair is legal. Data that
//! alternates between the two bank pairs lets Keccak-side work run next to
//! the arithmetic of the previous step.

use std::str::FromStr;

use pqproc_core::dilithium::{DilithiumLevel, DilithiumParams, PackKind};
use pqproc_core::saber::{SaberLevel, SaberParams};

use crate::cost::CostTable;
use crate::error::IsaError;
use crate::exec::Registers;
use crate::instr::{ByteLoc, Control, Instruction, Loc, Operand, PolyLoc};
use crate::memory::{Memory, BANKS, HALF_WORDS, WORDS_PER_BANK};
use crate::opcode::{Lane, Opcode, PackCode, Param};
use crate::program::Program;
use crate::sim::pair_conflict;

const PRIOR: &str = include_str!("../calibration/prior.txt");

/// Saber operations with a builtin program.
pub const SABER_OPS: [&str; 4] = ["keygen", "encrypt", "encaps", "decaps"];
/// Dilithium operations with a builtin program. `sign` runs the three
/// signing phases back to back.
pub const DILITHIUM_OPS: [&str; 6] = ["keygen", "sign_pre", "sign_loop", "sign_post", "sign", "verify"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuiltinOptions {
    /// Prime used for Saber products (23, 24 or 25 bits).
    pub prime_bits: u32,
    /// Message length for the Dilithium programs.
    pub msg_len: usize,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        Self {
            prime_bits: 25,
            msg_len: 32,
        }
    }
}

/// A program plus where its inputs and outputs live.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: String,
    pub program: Program,
    pub inputs: Vec<(&'static str, ByteLoc)>,
    pub outputs: Vec<(&'static str, ByteLoc)>,
}

impl Builtin {
    pub fn input(&self, name: &str) -> Option<ByteLoc> {
        self.inputs.iter().find(|(n, _)| *n == name).map(|&(_, b)| b)
    }

    pub fn output(&self, name: &str) -> Option<ByteLoc> {
        self.outputs.iter().find(|(n, _)| *n == name).map(|&(_, b)| b)
    }

    /// Writes one named input.
    pub fn load(&self, mem: &mut Memory, name: &str, data: &[u8]) -> Result<(), IsaError> {
        let at = self
            .input(name)
            .ok_or_else(|| IsaError::Execution(format!("{} has no input `{name}`", self.name)))?;
        if data.len() != at.len as usize {
            return Err(IsaError::Execution(format!("input `{name}` takes {} bytes, got {}", at.len, data.len())));
        }
        mem.write_bytes(at, data)
    }

    /// Reads one named output.
    pub fn read(&self, mem: &Memory, name: &str) -> Result<Vec<u8>, IsaError> {
        let at = self
            .output(name)
            .ok_or_else(|| IsaError::Execution(format!("{} has no output `{name}`", self.name)))?;
        Ok(mem.read_bytes(at))
    }
}

/// Outcome of the verification program.
pub fn verify_accepted(r: &Registers) -> bool {
    !r.reject && !r.cmp
}

pub fn builtin_program(scheme: &str, op: &str, level: &str) -> Result<Builtin, IsaError> {
    builtin_program_with(scheme, op, level, &BuiltinOptions::default())
}

pub fn builtin_program_with(scheme: &str, op: &str, level: &str, opts: &BuiltinOptions) -> Result<Builtin, IsaError> {
    let unsupported = || IsaError::UnsupportedBuiltin(format!("{scheme}/{op}/{level}"));
    match scheme.to_ascii_lowercase().as_str() {
        "saber" => {
            let lvl = SaberLevel::from_str(level).map_err(|_| unsupported())?;
            if !(23..=25).contains(&opts.prime_bits) {
                return Err(unsupported());
            }
            let p = lvl.params();
            let name = format!("saber/{op}/{}", lvl.name());
            match op {
                "keygen" => Ok(saber_keygen(name, &p, opts.prime_bits)),
                "encrypt" => Ok(saber_encrypt(name, &p, opts.prime_bits)),
                "encaps" => Ok(saber_encaps(name, &p, opts.prime_bits)),
                "decaps" => Ok(saber_decaps(name, &p, opts.prime_bits)),
                _ => Err(unsupported()),
            }
        }
        "dilithium" => {
            let lvl = DilithiumLevel::from_str(level).map_err(|_| unsupported())?;
            let p = lvl.params();
            let name = format!("dilithium/{op}/{}", lvl.number());
            match op {
                "keygen" => Ok(dilithium_keygen(name, &p)),
                "verify" => Ok(dilithium_verify(name, &p, opts.msg_len)),
                "sign_pre" | "sign_loop" | "sign_post" | "sign" => {
                    let mut parts = dilithium_sign(&p, opts.msg_len);
                    let idx = ["sign_pre", "sign_loop", "sign_post", "sign"].iter().position(|&s| s == op).expect("listed");
                    let mut b = parts.swap_remove(idx);
                    b.name = name;
                    Ok(b)
                }
                _ => Err(unsupported()),
            }
        }
        _ => Err(unsupported()),
    }
}

// ---------------------------------------------------------------------------
// Slot scheduling

/// True when `b` must stay on the same side of `a` as in the source.
fn depends(a: &Instruction, b: &Instruction) -> bool {
    for fa in a.footprint() {
        for fb in b.footprint() {
            if fa.bank == fb.bank
                && fa.words.start < fb.words.end
                && fb.words.start < fa.words.end
                && (fa.access.writes() || fb.access.writes())
            {
                return true;
            }
        }
    }
    let (ra, wa) = a.registers();
    let (rb, wb) = b.registers();
    wa.iter().any(|r| rb.contains(r) || wb.contains(r)) || wb.iter().any(|r| ra.contains(r))
}

/// Packs straight-line code into slots. Each lane keeps its order; the
/// interleaving maximizes the cycles hidden by pairing under `costs`.
pub fn schedule(region: &[Instruction], costs: &CostTable, overhead: u64) -> Vec<Instruction> {
    let lanes: [Vec<usize>; 2] = [Lane::Set1, Lane::Set2].map(|l| (0..region.len()).filter(|&i| region[i].lane() == l).collect());
    let (a, b) = (&lanes[0], &lanes[1]);
    let (n1, n2) = (a.len(), b.len());
    // need_b[i]: Set-2 instructions that must be out before a[i] may issue.
    let need = |mine: &Vec<usize>, other: &Vec<usize>| -> Vec<usize> {
        mine.iter()
            .map(|&x| other.iter().enumerate().filter(|&(_, &y)| y < x && depends(&region[y], &region[x])).map(|(k, _)| k + 1).max().unwrap_or(0))
            .collect()
    };
    let need_b = need(a, b);
    let need_a = need(b, a);

    const NONE: i64 = i64::MIN / 4;
    let mut best = vec![vec![NONE; n2 + 1]; n1 + 1];
    best[n1][n2] = 0;
    let gain = |i: usize, j: usize| -> Option<i64> {
        let (x, y) = (&region[a[i]], &region[b[j]]);
        if need_b[i] > j || need_a[j] > i || pair_conflict(x, y).is_some() {
            return None;
        }
        Some(costs.cost(x).min(costs.cost(y)) as i64 + overhead as i64)
    };
    for i in (0..=n1).rev() {
        for j in (0..=n2).rev() {
            if i == n1 && j == n2 {
                continue;
            }
            let mut v = NONE;
            if i < n1 && need_b[i] <= j {
                v = v.max(best[i + 1][j]);
            }
            if j < n2 && need_a[j] <= i {
                v = v.max(best[i][j + 1]);
            }
            if i < n1 && j < n2 {
                if let Some(g) = gain(i, j) {
                    if best[i + 1][j + 1] > NONE {
                        v = v.max(best[i + 1][j + 1] + g);
                    }
                }
            }
            best[i][j] = v;
        }
    }

    let mut out = Vec::with_capacity(region.len());
    let (mut i, mut j) = (0, 0);
    while i < n1 || j < n2 {
        let here = best[i][j];
        if i < n1 && j < n2 {
            if let Some(g) = gain(i, j) {
                if best[i + 1][j + 1] > NONE && best[i + 1][j + 1] + g == here {
                    out.push(region[a[i]].clone());
                    let mut second = region[b[j]].clone();
                    second.control.0 |= Control::PAR;
                    out.push(second);
                    i += 1;
                    j += 1;
                    continue;
                }
            }
        }
        if i < n1 && need_b[i] <= j && best[i + 1][j] == here {
            out.push(region[a[i]].clone());
            i += 1;
        } else {
            out.push(region[b[j]].clone());
            j += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Program builder

struct Alloc {
    next: [usize; BANKS],
}

impl Alloc {
    fn poly(&mut self, pair: usize) -> PolyLoc {
        self.polys(pair, 1)
    }

    /// `n` polynomials at a 64-word stride.
    fn polys(&mut self, pair: usize, n: usize) -> PolyLoc {
        let (b0, b1) = (2 * pair, 2 * pair + 1);
        let w = self.next[b0].max(self.next[b1]);
        let end = w + n * HALF_WORDS;
        assert!(end <= WORDS_PER_BANK, "builtin layout does not fit bank pair {pair}");
        self.next[b0] = end;
        self.next[b1] = end;
        PolyLoc::new(Loc::new(b0 as u8, w as u16), Loc::new(b1 as u8, w as u16))
    }

    fn bytes(&mut self, bank: usize, len: usize) -> ByteLoc {
        let w = self.next[bank];
        self.next[bank] += len.div_ceil(8);
        assert!(self.next[bank] <= WORDS_PER_BANK, "builtin layout does not fit bank {bank}");
        ByteLoc::new(bank as u8, w as u16, len as u32)
    }
}

struct Builder {
    out: Vec<Instruction>,
    region: Vec<Instruction>,
    mark_loop: bool,
    mem: Alloc,
    costs: CostTable,
}

fn po(x: PolyLoc) -> Operand {
    Operand::Poly(x)
}

fn bo(x: ByteLoc) -> Operand {
    Operand::Bytes(x)
}

impl Builder {
    fn new() -> Self {
        Self {
            out: Vec::new(),
            region: Vec::new(),
            mark_loop: false,
            mem: Alloc { next: [0; BANKS] },
            costs: PRIOR.parse().expect("prior cost table is valid"),
        }
    }

    fn op(&mut self, opcode: Opcode, operands: &[Operand], params: &[(Param, u32)]) {
        self.region.push(Instruction::new(opcode, operands.to_vec(), params.to_vec()));
    }

    fn flush(&mut self) {
        let region = std::mem::take(&mut self.region);
        let mut slots = schedule(&region, &self.costs, 2);
        if self.mark_loop {
            if let Some(first) = slots.first_mut() {
                first.control.0 |= Control::LOOP;
            }
            self.mark_loop = false;
        }
        self.out.extend(slots);
    }

    /// Ends the current region; the next one starts the loop body.
    fn loop_start(&mut self) {
        self.flush();
        self.mark_loop = true;
    }

    /// Ends the loop body with the exit test.
    fn branch(&mut self, omega: u32) {
        self.flush();
        self.out.push(Instruction::new(Opcode::VerifyDil, vec![], vec![(Param::Omega, omega)]));
    }

    /// Instruction count emitted so far (a segment boundary).
    fn mark(&mut self) -> usize {
        self.flush();
        self.out.len()
    }

    fn program(&mut self, range: std::ops::Range<usize>) -> Program {
        self.flush();
        Program::new(self.out[range.clone()].to_vec()).unwrap_or_else(|e| panic!("{e}\n{}", self.out[range.clone()].iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")))
    }

    fn finish(&mut self) -> Program {
        let n = self.mark();
        self.program(0..n)
    }

    // Frequently used instruction forms.

    fn ntt(&mut self, dst: PolyLoc, src: PolyLoc, q: u32, lift: Option<u32>) {
        let mut params = vec![(Param::Q, q)];
        params.extend(lift.map(|l| (Param::Lift, l)));
        self.op(Opcode::Ntt, &[po(dst), po(src)], &params);
    }

    fn intt(&mut self, x: PolyLoc, q: u32, round: Option<u32>) {
        let mut params = vec![(Param::Q, q)];
        params.extend(round.map(|r| (Param::Round, r)));
        self.op(Opcode::Intt, &[po(x)], &params);
    }

    fn pmul(&mut self, dst: PolyLoc, x: PolyLoc, y: PolyLoc, q: u32, acc: bool) {
        self.op(Opcode::Pmul, &[po(dst), po(x), po(y)], &[(Param::Q, q), (Param::Acc, acc as u32)]);
    }

    fn padd(&mut self, dst: PolyLoc, x: PolyLoc, y: PolyLoc) {
        self.op(Opcode::Padd, &[po(dst), po(x), po(y)], &[(Param::Q, 23)]);
    }

    fn psub(&mut self, dst: PolyLoc, x: PolyLoc, y: PolyLoc) {
        self.op(Opcode::Psub, &[po(dst), po(x), po(y)], &[(Param::Q, 23)]);
    }

    fn copy(&mut self, dst: Operand, src: Operand) {
        self.op(Opcode::Copy, &[dst, src], &[]);
    }

    fn write_nonce(&mut self, dst: ByteLoc, value: u32, step: Option<u32>) {
        let mut params = vec![(Param::Value, value)];
        params.extend(step.map(|s| (Param::Step, s)));
        self.op(Opcode::Write, &[bo(dst)], &params);
    }

    fn shake256(&mut self, dst: ByteLoc, src: ByteLoc) {
        self.op(Opcode::Shake256, &[bo(dst), bo(src)], &[]);
    }
}

// ---------------------------------------------------------------------------
// Saber

/// Byte buffers live in bank 3 unless noted; polynomials alternate pairs.
const IO_BANK: usize = 3;
const SCRATCH_BANK: usize = 1;

struct SaberSk {
    all: ByteLoc,
}

impl SaberSk {
    fn s(&self, i: usize) -> ByteLoc {
        self.all.slice((i * 416) as u32, 416)
    }
    fn pk(&self, p: &SaberParams) -> ByteLoc {
        self.all.slice((p.l * 416) as u32, p.public_key_bytes() as u32)
    }
    fn hpk(&self, p: &SaberParams) -> ByteLoc {
        self.all.slice((p.secret_key_bytes() - 64) as u32, 32)
    }
    fn z(&self, p: &SaberParams) -> ByteLoc {
        self.all.slice((p.secret_key_bytes() - 32) as u32, 32)
    }
}

fn pk_b(pk: ByteLoc, i: usize) -> ByteLoc {
    pk.slice((i * 320) as u32, 320)
}

fn pk_seed(pk: ByteLoc, p: &SaberParams) -> ByteLoc {
    pk.slice((p.l * 320) as u32, 32)
}

/// Secrets from the noise seed, returned in the transform domain.
fn saber_secrets(bd: &mut Builder, p: &SaberParams, q: u32, noise: ByteLoc) -> (Vec<PolyLoc>, Vec<PolyLoc>) {
    bd.op(Opcode::ShakeReset, &[bo(noise)], &[(Param::Hash, 128), (Param::Width, p.mu)]);
    let mut raw = Vec::new();
    let mut hat = Vec::new();
    for i in 0..p.l {
        let s = bd.mem.poly(i % 2);
        let sh = bd.mem.poly(i % 2);
        bd.op(Opcode::Binomial, &[po(s)], &[(Param::Mu, p.mu)]);
        bd.ntt(sh, s, q, Some(13));
        raw.push(s);
        hat.push(sh);
    }
    (raw, hat)
}

/// `A·s` (or `Aᵀ·s`) with the matrix generated on the fly; returns the
/// rounded vector packed at 10 bits into `out`.
fn saber_matrix(bd: &mut Builder, p: &SaberParams, q: u32, seed: ByteLoc, s_hat: &[PolyLoc], transpose: bool, out: ByteLoc) {
    let l = p.l;
    bd.op(Opcode::ShakeReset, &[bo(seed)], &[(Param::Hash, 128), (Param::Width, 13)]);
    let acc: Vec<PolyLoc> = (0..l).map(|i| bd.mem.poly(i % 2)).collect();
    let slots = [bd.mem.poly(0), bd.mem.poly(1)];
    let mut started = vec![false; l];
    for t in 0..l * l {
        let (r, c) = (t / l, t % l);
        let (row, col) = if transpose { (c, r) } else { (r, c) };
        let a = slots[t % 2];
        bd.op(Opcode::Shake128W26, &[po(a)], &[]);
        bd.ntt(a, a, q, Some(13));
        bd.pmul(acc[row], a, s_hat[col], q, started[row]);
        started[row] = true;
    }
    for (i, &x) in acc.iter().enumerate() {
        bd.intt(x, q, Some(13));
        bd.op(Opcode::AddRound, &[bo(out.slice((i * 320) as u32, 320)), po(x)], &[]);
    }
}

/// `v = Σ b_j·s_j` over `2^10` from a packed 10-bit vector.
fn saber_inner(bd: &mut Builder, p: &SaberParams, q: u32, packed: ByteLoc, s_hat: &[PolyLoc]) -> PolyLoc {
    let v = bd.mem.poly(0);
    for (j, &sh) in s_hat.iter().enumerate() {
        let bj = bd.mem.poly(j % 2);
        bd.op(Opcode::Bs2Polvec, &[po(bj), bo(pk_b(packed, j))], &[(Param::Bits, 10)]);
        bd.ntt(bj, bj, q, Some(10));
        bd.pmul(v, bj, sh, q, j > 0);
    }
    bd.intt(v, q, Some(10));
    let _ = p;
    v
}

/// Public-key encryption of `msg` with coins `noise` into `ct`.
fn saber_enc(bd: &mut Builder, p: &SaberParams, q: u32, msg: ByteLoc, noise: ByteLoc, pk: ByteLoc, ct: ByteLoc) {
    let (_, s_hat) = saber_secrets(bd, p, q, noise);
    saber_matrix(bd, p, q, pk_seed(pk, p), &s_hat, false, ct);
    let v = saber_inner(bd, p, q, pk, &s_hat);
    let cm = ct.slice((p.l * 320) as u32, p.scale_bytes() as u32);
    bd.op(Opcode::AddPack, &[bo(cm), po(v), bo(msg)], &[(Param::Et, p.et)]);
}

fn saber_keygen(name: String, p: &SaberParams, q: u32) -> Builtin {
    let mut bd = Builder::new();
    let sk = SaberSk {
        all: bd.mem.bytes(IO_BANK, p.secret_key_bytes()),
    };
    let seed_in = bd.mem.bytes(SCRATCH_BANK, 32);
    let noise = bd.mem.bytes(SCRATCH_BANK, 32);
    let pk = sk.pk(p);
    bd.op(Opcode::Shake128, &[bo(pk_seed(pk, p)), bo(seed_in)], &[]);
    let (raw, s_hat) = saber_secrets(&mut bd, p, q, noise);
    for (i, &s) in raw.iter().enumerate() {
        bd.op(Opcode::Pol2Bs, &[bo(sk.s(i)), po(s)], &[(Param::Bits, 13)]);
    }
    saber_matrix(&mut bd, p, q, pk_seed(pk, p), &s_hat, true, pk);
    bd.op(Opcode::Sha3_256, &[bo(sk.hpk(p)), bo(pk)], &[]);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("seed_a", seed_in), ("noise", noise), ("z", sk.z(p))],
        outputs: vec![("pk", pk), ("sk", sk.all)],
    }
}

fn saber_encrypt(name: String, p: &SaberParams, q: u32) -> Builtin {
    let mut bd = Builder::new();
    let pk = bd.mem.bytes(IO_BANK, p.public_key_bytes());
    let ct = bd.mem.bytes(IO_BANK, p.ciphertext_bytes());
    let msg = bd.mem.bytes(SCRATCH_BANK, 32);
    let noise = bd.mem.bytes(SCRATCH_BANK, 32);
    saber_enc(&mut bd, p, q, msg, noise, pk, ct);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("msg", msg), ("noise", noise), ("pk", pk)],
        outputs: vec![("ct", ct)],
    }
}

fn saber_encaps(name: String, p: &SaberParams, q: u32) -> Builtin {
    let mut bd = Builder::new();
    let pk = bd.mem.bytes(IO_BANK, p.public_key_bytes());
    let ct = bd.mem.bytes(IO_BANK, p.ciphertext_bytes());
    let coins = bd.mem.bytes(SCRATCH_BANK, 32);
    let buf = bd.mem.bytes(SCRATCH_BANK, 64);
    let kr = bd.mem.bytes(SCRATCH_BANK, 64);
    let ss = bd.mem.bytes(SCRATCH_BANK, 32);
    bd.op(Opcode::Sha3_256, &[bo(buf.slice(0, 32)), bo(coins)], &[]);
    bd.op(Opcode::Sha3_256, &[bo(buf.slice(32, 32)), bo(pk)], &[]);
    bd.op(Opcode::Sha3_512, &[bo(kr), bo(buf)], &[]);
    saber_enc(&mut bd, p, q, buf.slice(0, 32), kr.slice(32, 32), pk, ct);
    bd.op(Opcode::Sha3_256, &[bo(kr.slice(32, 32)), bo(ct)], &[]);
    bd.op(Opcode::Sha3_256, &[bo(ss), bo(kr)], &[]);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("coins", coins), ("pk", pk)],
        outputs: vec![("ct", ct), ("ss", ss)],
    }
}

fn saber_decaps(name: String, p: &SaberParams, q: u32) -> Builtin {
    let mut bd = Builder::new();
    let sk = SaberSk {
        all: bd.mem.bytes(IO_BANK, p.secret_key_bytes()),
    };
    let ct = bd.mem.bytes(IO_BANK, p.ciphertext_bytes());
    let cmp = bd.mem.bytes(SCRATCH_BANK, p.ciphertext_bytes());
    let buf = bd.mem.bytes(SCRATCH_BANK, 64);
    let kr = bd.mem.bytes(SCRATCH_BANK, 64);
    let ss = bd.mem.bytes(SCRATCH_BANK, 32);

    let mut s_hat = Vec::new();
    for i in 0..p.l {
        let s = bd.mem.poly(i % 2);
        bd.op(Opcode::Bs2Polvec, &[po(s), bo(sk.s(i))], &[(Param::Bits, 13)]);
        bd.ntt(s, s, q, Some(13));
        s_hat.push(s);
    }
    let v = saber_inner(&mut bd, p, q, ct, &s_hat);
    let cm = ct.slice((p.l * 320) as u32, p.scale_bytes() as u32);
    bd.op(Opcode::UnpackMsg, &[bo(buf.slice(0, 32)), po(v), bo(cm)], &[(Param::Et, p.et)]);
    bd.copy(bo(buf.slice(32, 32)), bo(sk.hpk(p)));
    bd.op(Opcode::Sha3_512, &[bo(kr), bo(buf)], &[]);
    saber_enc(&mut bd, p, q, buf.slice(0, 32), kr.slice(32, 32), sk.pk(p), cmp);
    bd.op(Opcode::Verify, &[bo(ct), bo(cmp)], &[]);
    bd.op(Opcode::Sha3_256, &[bo(kr.slice(32, 32)), bo(ct)], &[]);
    bd.op(Opcode::Cmov, &[bo(kr.slice(0, 32)), bo(sk.z(p))], &[]);
    bd.op(Opcode::Sha3_256, &[bo(ss), bo(kr)], &[]);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("sk", sk.all), ("ct", ct)],
        outputs: vec![("ss", ss)],
    }
}

// ---------------------------------------------------------------------------
// Dilithium

fn kind_params(kind: PackKind) -> Vec<(Param, u32)> {
    match kind {
        PackKind::T1 => vec![(Param::Kind, PackCode::T1 as u32)],
        PackKind::T0 => vec![(Param::Kind, PackCode::T0 as u32)],
        PackKind::Eta(e) => vec![(Param::Kind, PackCode::Eta as u32), (Param::Eta, e)],
        PackKind::Z(g) => vec![(Param::Kind, PackCode::Z as u32), (Param::Gamma1, g)],
        PackKind::W1(g) => vec![(Param::Kind, PackCode::W1 as u32), (Param::Gamma2, g)],
    }
}

struct DilSk {
    all: ByteLoc,
    eta_bytes: usize,
    l: usize,
    k: usize,
}

impl DilSk {
    fn new(all: ByteLoc, p: &DilithiumParams) -> Self {
        Self {
            all,
            eta_bytes: p.eta_bytes(),
            l: p.l,
            k: p.k,
        }
    }
    fn rho(&self) -> ByteLoc {
        self.all.slice(0, 32)
    }
    fn key(&self) -> ByteLoc {
        self.all.slice(32, 32)
    }
    fn tr(&self) -> ByteLoc {
        self.all.slice(64, 32)
    }
    fn s1(&self, j: usize) -> ByteLoc {
        self.all.slice((96 + j * self.eta_bytes) as u32, self.eta_bytes as u32)
    }
    fn s2(&self, i: usize) -> ByteLoc {
        self.all.slice((96 + (self.l + i) * self.eta_bytes) as u32, self.eta_bytes as u32)
    }
    fn t0(&self, i: usize) -> ByteLoc {
        self.all.slice((96 + (self.l + self.k) * self.eta_bytes + i * 416) as u32, 416)
    }
}

fn pk_t1(pk: ByteLoc, i: usize) -> ByteLoc {
    pk.slice((32 + i * 320) as u32, 320)
}

struct DilSig {
    all: ByteLoc,
    z_bytes: usize,
    l: usize,
    hint: usize,
}

impl DilSig {
    fn new(all: ByteLoc, p: &DilithiumParams) -> Self {
        Self {
            all,
            z_bytes: p.z_bytes(),
            l: p.l,
            hint: p.hint_bytes(),
        }
    }
    fn c(&self) -> ByteLoc {
        self.all.slice(0, 32)
    }
    fn z(&self, j: usize) -> ByteLoc {
        self.all.slice((32 + j * self.z_bytes) as u32, self.z_bytes as u32)
    }
    fn h(&self) -> ByteLoc {
        self.all.slice((32 + self.l * self.z_bytes) as u32, self.hint as u32)
    }
}

/// Seed buffers with room for a 2-byte nonce, one per bank pair so the
/// sampler of one pair never reads a bank the other pair's arithmetic uses.
fn seed_pair(bd: &mut Builder, len: usize) -> [ByteLoc; 2] {
    [bd.mem.bytes(0, len + 2), bd.mem.bytes(2, len + 2)]
}

/// `acc_i = Σ_j A[i][j]·v̂_j` with `A` sampled on the fly from `rho`.
/// `v_hat[j][pair]` holds a copy of `v̂_j` in each bank pair; products run
/// in the pair of the freshly sampled matrix entry.
fn dil_matrix_on_the_fly(bd: &mut Builder, p: &DilithiumParams, rho: &[ByteLoc; 2], v_hat: &[[PolyLoc; 2]]) -> Vec<PolyLoc> {
    let mut acc: Vec<[Option<PolyLoc>; 2]> = vec![[None, None]; p.k];
    for i in 0..p.k {
        for j in 0..p.l {
            let t = i * p.l + j;
            let pair = t % 2;
            let a = bd.mem.poly(pair);
            bd.write_nonce(rho[pair].slice(32, 2), ((i << 8) + j) as u32, None);
            bd.op(Opcode::RejUniform, &[po(a), bo(rho[pair])], &[]);
            let started = acc[i][pair].is_some();
            let dst = *acc[i][pair].get_or_insert_with(|| bd.mem.poly(pair));
            bd.pmul(dst, a, v_hat[j][pair], 23, started);
        }
    }
    acc.into_iter()
        .map(|pair| match pair {
            [Some(x), Some(y)] => {
                bd.padd(x, x, y);
                x
            }
            [Some(x), None] | [None, Some(x)] => x,
            [None, None] => unreachable!("every row has at least one column"),
        })
        .collect()
}

/// Forward transform of `src` into pair `pair`, copied into the other pair.
fn ntt_both(bd: &mut Builder, src: PolyLoc, pair: usize) -> [PolyLoc; 2] {
    let home = bd.mem.poly(pair);
    let other = bd.mem.poly(1 - pair);
    bd.ntt(home, src, 23, None);
    bd.copy(po(other), po(home));
    if pair == 0 {
        [home, other]
    } else {
        [other, home]
    }
}

fn dilithium_keygen(name: String, p: &DilithiumParams) -> Builtin {
    let mut bd = Builder::new();
    let pk = bd.mem.bytes(IO_BANK, p.public_key_bytes());
    let sk = DilSk::new(bd.mem.bytes(IO_BANK, p.secret_key_bytes()), p);
    let seed = bd.mem.bytes(SCRATCH_BANK, 32);
    let buf = bd.mem.bytes(SCRATCH_BANK, 128);
    let rho = seed_pair(&mut bd, 32);
    let rp = seed_pair(&mut bd, 64);

    bd.shake256(buf, seed);
    let (rho_b, rp_b, key_b) = (buf.slice(0, 32), buf.slice(32, 64), buf.slice(96, 32));
    bd.copy(bo(pk.slice(0, 32)), bo(rho_b));
    bd.copy(bo(sk.rho()), bo(rho_b));
    bd.copy(bo(sk.key()), bo(key_b));
    for x in 0..2 {
        bd.copy(bo(rho[x].slice(0, 32)), bo(rho_b));
        bd.copy(bo(rp[x].slice(0, 64)), bo(rp_b));
    }

    let eta = PackKind::Eta(p.eta);
    let mut s1_hat = Vec::new();
    for j in 0..p.l {
        let pair = j % 2;
        let s = bd.mem.poly(pair);
        bd.write_nonce(rp[pair].slice(64, 2), j as u32, None);
        bd.op(Opcode::RejEta, &[po(s), bo(rp[pair])], &[(Param::Eta, p.eta)]);
        bd.op(Opcode::PackDil, &[bo(sk.s1(j)), po(s)], &kind_params(eta));
        s1_hat.push(ntt_both(&mut bd, s, pair));
    }
    let mut s2 = Vec::new();
    for i in 0..p.k {
        let pair = (p.l + i) % 2;
        let s = bd.mem.poly(pair);
        bd.write_nonce(rp[pair].slice(64, 2), (p.l + i) as u32, None);
        bd.op(Opcode::RejEta, &[po(s), bo(rp[pair])], &[(Param::Eta, p.eta)]);
        bd.op(Opcode::PackDil, &[bo(sk.s2(i)), po(s)], &kind_params(eta));
        s2.push(s);
    }

    let acc = dil_matrix_on_the_fly(&mut bd, p, &rho, &s1_hat);
    for (i, &x) in acc.iter().enumerate() {
        let pair = i % 2;
        let (t1, t0) = (bd.mem.poly(pair), bd.mem.poly(pair));
        bd.intt(x, 23, None);
        bd.padd(x, x, s2[i]);
        bd.op(Opcode::Power2Round, &[po(t1), po(t0), po(x)], &[]);
        bd.op(Opcode::PackDil, &[bo(pk_t1(pk, i)), po(t1)], &kind_params(PackKind::T1));
        bd.op(Opcode::PackDil, &[bo(sk.t0(i)), po(t0)], &kind_params(PackKind::T0));
    }
    bd.shake256(sk.tr(), pk);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("seed", seed)],
        outputs: vec![("pk", pk), ("sk", sk.all)],
    }
}

/// The three signing phases sharing one layout. The matrix is sampled
/// again in every attempt, next to the products that consume it, followed by the complete
/// program: `[sign_pre, sign_loop, sign_post, sign]`.
fn dilithium_sign(p: &DilithiumParams, msg_len: usize) -> Vec<Builtin> {
    let mut bd = Builder::new();
    let sk = DilSk::new(bd.mem.bytes(IO_BANK, p.secret_key_bytes()), p);
    let sig = DilSig::new(bd.mem.bytes(IO_BANK, p.signature_bytes()), p);
    let tm = bd.mem.bytes(SCRATCH_BANK, 32 + msg_len);
    let km = bd.mem.bytes(SCRATCH_BANK, 96);
    let mw = bd.mem.bytes(SCRATCH_BANK, 64 + p.k * p.w1_bytes());
    let rho = seed_pair(&mut bd, 32);
    let rp = seed_pair(&mut bd, 64);
    let msg = tm.slice(32, msg_len as u32);

    // Phase 1: hashes, key unpacking and transforms.
    bd.copy(bo(tm.slice(0, 32)), bo(sk.tr()));
    bd.copy(bo(km.slice(0, 32)), bo(sk.key()));
    for x in 0..2 {
        bd.copy(bo(rho[x].slice(0, 32)), bo(sk.rho()));
    }
    bd.shake256(km.slice(32, 64), tm);
    bd.copy(bo(mw.slice(0, 64)), bo(km.slice(32, 64)));
    bd.shake256(rp[0].slice(0, 64), km);
    bd.copy(bo(rp[1].slice(0, 64)), bo(rp[0].slice(0, 64)));

    let eta = PackKind::Eta(p.eta);
    let unpack = |bd: &mut Builder, src: ByteLoc, kind: PackKind, pair: usize| {
        let x = bd.mem.poly(pair);
        let xh = bd.mem.poly(pair);
        bd.op(Opcode::UnpackDil, &[po(x), bo(src)], &kind_params(kind));
        bd.ntt(xh, x, 23, None);
        xh
    };
    let s1_hat: Vec<PolyLoc> = (0..p.l).map(|j| unpack(&mut bd, sk.s1(j), eta, j % 2)).collect();
    let s2_hat: Vec<PolyLoc> = (0..p.k).map(|i| unpack(&mut bd, sk.s2(i), eta, (p.l + i) % 2)).collect();
    let t0_hat: Vec<PolyLoc> = (0..p.k).map(|i| unpack(&mut bd, sk.t0(i), PackKind::T0, (p.l + p.k + i) % 2)).collect();
    let pre_end = bd.mark();

    // Phase 2: one attempt per pass; the exit test loops on rejection.
    // The products by the challenge run as one sequence of l + 2k items
    // alternating bank pairs, so each norm check can issue next to the
    // arithmetic of the following item.
    bd.loop_start();
    let c = bd.mem.poly(0);
    let c_hat = [bd.mem.poly(0), bd.mem.poly(1)];
    bd.op(Opcode::CounterRef, &[], &[]);
    bd.op(Opcode::Refresh, &[po(c)], &[]);
    let mut y = Vec::new();
    let mut y_hat = Vec::new();
    for j in 0..p.l {
        let pair = j % 2;
        let yj = bd.mem.poly(pair);
        bd.write_nonce(rp[pair].slice(64, 2), j as u32, Some(p.l as u32));
        bd.op(Opcode::RejGamma, &[po(yj), bo(rp[pair])], &[(Param::Gamma1, p.gamma1)]);
        y_hat.push(ntt_both(&mut bd, yj, pair));
        y.push(yj);
    }
    let w = dil_matrix_on_the_fly(&mut bd, p, &rho, &y_hat);
    let mut w1 = Vec::new();
    let mut w0 = Vec::new();
    for (i, &wi) in w.iter().enumerate() {
        let pair = (p.l + i) % 2;
        bd.intt(wi, 23, None);
        let (hi, lo) = (bd.mem.poly(pair), bd.mem.poly(pair));
        bd.op(Opcode::Decompose, &[po(hi), po(lo), po(wi)], &[(Param::Gamma2, p.gamma2)]);
        let w1b = p.w1_bytes();
        bd.op(Opcode::EncodeH, &[bo(mw.slice((64 + i * w1b) as u32, w1b as u32)), po(hi)], &[(Param::Gamma2, p.gamma2)]);
        w1.push(hi);
        w0.push(lo);
    }
    bd.shake256(sig.c(), mw);
    bd.op(Opcode::SampleInBall, &[po(c), bo(sig.c())], &[(Param::Tau, p.tau as u32)]);
    bd.ntt(c_hat[0], c, 23, None);
    bd.copy(po(c_hat[1]), po(c_hat[0]));

    let mut z = Vec::new();
    for j in 0..p.l {
        let pair = j % 2;
        let zj = bd.mem.poly(pair);
        bd.pmul(zj, c_hat[pair], s1_hat[j], 23, false);
        bd.intt(zj, 23, None);
        bd.padd(zj, zj, y[j]);
        bd.op(Opcode::VerifyDil, &[po(zj)], &[(Param::Bound, p.gamma1 - p.beta)]);
        z.push(zj);
    }
    let mut r0 = Vec::new();
    for i in 0..p.k {
        let pair = (p.l + i) % 2;
        let x = bd.mem.poly(pair);
        bd.pmul(x, c_hat[pair], s2_hat[i], 23, false);
        bd.intt(x, 23, None);
        bd.psub(x, w0[i], x);
        bd.op(Opcode::VerifyDil, &[po(x)], &[(Param::Bound, p.gamma2 - p.beta)]);
        r0.push(x);
    }
    let hints = bd.mem.polys(0, p.k);
    for i in 0..p.k {
        let pair = (p.l + p.k + i) % 2;
        let ct0 = bd.mem.poly(pair);
        bd.pmul(ct0, c_hat[pair], t0_hat[i], 23, false);
        bd.intt(ct0, 23, None);
        bd.op(Opcode::VerifyDil, &[po(ct0)], &[(Param::Bound, p.gamma2)]);
        bd.padd(ct0, r0[i], ct0);
        bd.op(Opcode::MakeHint, &[po(hints.offset(i)), po(ct0), po(w1[i])], &[(Param::Gamma2, p.gamma2)]);
    }
    bd.branch(p.omega as u32);
    let loop_end = bd.mark();

    // Phase 3: encoding of the accepted attempt.
    for (j, &zj) in z.iter().enumerate() {
        bd.op(Opcode::PackDil, &[bo(sig.z(j)), po(zj)], &kind_params(PackKind::Z(p.gamma1)));
    }
    bd.op(Opcode::PackHint, &[bo(sig.h()), po(hints)], &[(Param::N, p.k as u32), (Param::Omega, p.omega as u32)]);
    let end = bd.mark();

    let inputs = vec![("sk", sk.all), ("msg", msg)];
    let outputs = vec![("sig", sig.all)];
    let part = |name: &str, prog: Program, ins: &[(&'static str, ByteLoc)], outs: &[(&'static str, ByteLoc)]| Builtin {
        name: name.to_string(),
        program: prog,
        inputs: ins.to_vec(),
        outputs: outs.to_vec(),
    };
    vec![
        part("sign_pre", bd.program(0..pre_end), &inputs, &[]),
        part("sign_loop", bd.program(pre_end..loop_end), &[], &[]),
        part("sign_post", bd.program(loop_end..end), &[], &outputs),
        part("sign", bd.program(0..end), &inputs, &outputs),
    ]
}

fn dilithium_verify(name: String, p: &DilithiumParams, msg_len: usize) -> Builtin {
    let mut bd = Builder::new();
    let pk = bd.mem.bytes(IO_BANK, p.public_key_bytes());
    let sig = DilSig::new(bd.mem.bytes(IO_BANK, p.signature_bytes()), p);
    let tm = bd.mem.bytes(SCRATCH_BANK, 32 + msg_len);
    let mw = bd.mem.bytes(SCRATCH_BANK, 64 + p.k * p.w1_bytes());
    let c2 = bd.mem.bytes(SCRATCH_BANK, 32);
    let rho = seed_pair(&mut bd, 32);
    let msg = tm.slice(32, msg_len as u32);

    bd.shake256(tm.slice(0, 32), pk);
    bd.shake256(mw.slice(0, 64), tm);
    for x in 0..2 {
        bd.copy(bo(rho[x].slice(0, 32)), bo(pk.slice(0, 32)));
    }
    let h = bd.mem.polys(0, p.k);
    bd.op(Opcode::UnpackHint, &[po(h), bo(sig.h())], &[(Param::N, p.k as u32), (Param::Omega, p.omega as u32)]);

    let mut z_hat = Vec::new();
    for j in 0..p.l {
        let pair = j % 2;
        let zj = bd.mem.poly(pair);
        bd.op(Opcode::UnpackDil, &[po(zj), bo(sig.z(j))], &kind_params(PackKind::Z(p.gamma1)));
        bd.op(Opcode::VerifyDil, &[po(zj)], &[(Param::Bound, p.gamma1 - p.beta)]);
        z_hat.push(ntt_both(&mut bd, zj, pair));
    }
    let c = bd.mem.poly(0);
    let c_hat = bd.mem.poly(0);
    bd.op(Opcode::Refresh, &[po(c)], &[]);
    bd.op(Opcode::SampleInBall, &[po(c), bo(sig.c())], &[(Param::Tau, p.tau as u32)]);
    bd.ntt(c_hat, c, 23, None);
    let mut ct1 = Vec::new();
    for i in 0..p.k {
        let pair = i % 2;
        let t1 = bd.mem.poly(pair);
        bd.op(Opcode::UnpackDil, &[po(t1), bo(pk_t1(pk, i))], &[(Param::Kind, PackCode::T1 as u32), (Param::Shift, 13)]);
        bd.ntt(t1, t1, 23, None);
        bd.pmul(t1, c_hat, t1, 23, false);
        ct1.push(t1);
    }
    let acc = dil_matrix_on_the_fly(&mut bd, p, &rho, &z_hat);
    let w1b = p.w1_bytes();
    for (i, &x) in acc.iter().enumerate() {
        let w1 = bd.mem.poly(i % 2);
        bd.psub(x, x, ct1[i]);
        bd.intt(x, 23, None);
        bd.op(Opcode::UseHint, &[po(w1), po(h.offset(i)), po(x)], &[(Param::Gamma2, p.gamma2)]);
        bd.op(Opcode::EncodeH, &[bo(mw.slice((64 + i * w1b) as u32, w1b as u32)), po(w1)], &[(Param::Gamma2, p.gamma2)]);
    }
    bd.shake256(c2, mw);
    bd.op(Opcode::Verify, &[bo(c2), bo(sig.c())], &[]);
    Builtin {
        name,
        program: bd.finish(),
        inputs: vec![("pk", pk), ("msg", msg), ("sig", sig.all)],
        outputs: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run, Mode, SimConfig};

    #[test]
    fn every_builtin_builds() {
        for lvl in ["lightsaber", "saber", "firesaber"] {
            for op in SABER_OPS {
                let bt = builtin_program("saber", op, lvl).unwrap();
                assert!(bt.program.pairs() > 0, "{}", bt.name);
            }
        }
        for lvl in ["2", "3", "5"] {
            for op in DILITHIUM_OPS {
                let bt = builtin_program("dilithium", op, lvl).unwrap();
                assert!(!bt.program.is_empty(), "{}", bt.name);
            }
        }
    }

    #[test]
    fn unsupported_triples() {
        for (s, o, l) in [("saber", "sign", "saber"), ("dilithium", "keygen", "4"), ("kyber", "keygen", "2"), ("saber", "keygen", "huge")] {
            assert!(matches!(builtin_program(s, o, l), Err(IsaError::UnsupportedBuiltin(_))));
        }
        let bad = BuiltinOptions { prime_bits: 22, msg_len: 32 };
        assert!(builtin_program_with("saber", "keygen", "saber", &bad).is_err());
    }

    #[test]
    fn scheduler_keeps_dependencies() {
        // The hash feeds the NTT; the independent PADD may pair with it.
        let text = "SHAKE128 b0:0/8 b2:0/8\nNTT b0:0 b1:0 q=23\nPADD b2:64 b3:64 b2:128 b3:128 b2:192 b3:192 q=23\n";
        let prog: Program = text.parse().unwrap();
        let out = schedule(prog.instructions(), &CostTable::uniform(10), 2);
        let sched = Program::new(out).unwrap();
        assert_eq!(sched.pairs(), 0, "hash and NTT overlap, and PADD touches the hash input bank");
        let text = "SHAKE128 b0:0/8 b0:8/8\nNTT b2:0 b3:0 q=23\n";
        let prog: Program = text.parse().unwrap();
        let sched = Program::new(schedule(prog.instructions(), &CostTable::uniform(10), 2)).unwrap();
        assert_eq!(sched.pairs(), 1);
        let a = run(&prog, Memory::new(), Mode::Serial, &SimConfig::default()).unwrap();
        let b = run(&sched, Memory::new(), Mode::Parallel, &SimConfig::default()).unwrap();
        assert!(a.memory.same_data(&b.memory));
    }
}
