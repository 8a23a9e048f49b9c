//! Functional semantics of every opcode.

use pqproc_core::dilithium::{
    decompose, eta_poly, gamma_poly, make_hint_low, pack_hint, pack_poly, power2round, uniform_poly, unpack_hint, unpack_poly,
    use_hint, PackKind,
};
use pqproc_core::keccak::samplers::sample_binomial;
use pqproc_core::keccak::{sha3_256, sha3_512, shake, ExtractMode, HashMode, XofStream};
use pqproc_core::ntt::{forward_in_place, inverse_in_place, TwiddleTable};
use pqproc_core::poly::{pack_bits, unpack_bits};
use pqproc_core::saber::{add_pack, unpack_msg, SaberLevel, SaberParams};
use pqproc_core::{Modulus, Poly, PolyVec, PrimeCtx, N};

use crate::error::IsaError;
use crate::instr::{ByteLoc, Instruction, Operand};
use crate::memory::Memory;
use crate::opcode::{Opcode, PackCode, Param};

/// Architectural registers outside the data memory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Registers {
    /// Signing attempt counter, bumped by the loop back edge.
    pub kappa: u32,
    /// Hint weight accumulated by `MAKEHINT`.
    pub hints: u32,
    /// Set by a failed norm check or a malformed hint encoding.
    pub reject: bool,
    /// Set when the last `VERIFY` found a difference.
    pub cmp: bool,
}

/// What to do after an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Next,
    /// Jump back to the loop mark.
    Loop,
}

/// Memory, registers and the Keccak session.
#[derive(Clone, Debug)]
pub struct Machine {
    pub memory: Memory,
    pub registers: Registers,
    session: Option<XofStream>,
}

fn fail(ins: &Instruction, msg: impl std::fmt::Display) -> IsaError {
    IsaError::Execution(format!("{}: {msg}", ins.opcode))
}

fn q23() -> PrimeCtx {
    PrimeCtx::q23()
}

fn field_poly(c: [u32; N]) -> Poly {
    Poly::from_coeffs(Modulus::Prime(q23()), c)
}

fn saber_params(ins: &Instruction, et: u32) -> Result<SaberParams, IsaError> {
    SaberLevel::ALL
        .iter()
        .map(|l| l.params())
        .find(|p| p.et == et)
        .ok_or_else(|| fail(ins, format!("no Saber level uses et={et}")))
}

fn pack_kind(ins: &Instruction) -> Result<PackKind, IsaError> {
    let code = PackCode::from_code(ins.param(Param::Kind).unwrap_or(u32::MAX)).ok_or_else(|| fail(ins, "bad kind"))?;
    let need = |p: Param| ins.param(p).ok_or_else(|| fail(ins, format!("kind={} needs `{}`", code.name(), p.name())));
    Ok(match code {
        PackCode::T1 => PackKind::T1,
        PackCode::T0 => PackKind::T0,
        PackCode::Eta => PackKind::Eta(need(Param::Eta)?),
        PackCode::Z => PackKind::Z(need(Param::Gamma1)?),
        PackCode::W1 => PackKind::W1(need(Param::Gamma2)?),
    })
}

fn expect_len(ins: &Instruction, b: ByteLoc, want: usize) -> Result<(), IsaError> {
    if b.len as usize != want {
        return Err(fail(ins, format!("buffer {}/{} should hold {want} bytes", b.at, b.len)));
    }
    Ok(())
}

fn hash_mode(bits: u32) -> HashMode {
    if bits == 128 {
        HashMode::Shake128
    } else {
        HashMode::Shake256
    }
}

/// Seed bytes followed by a little-endian 16-bit nonce.
fn split_nonce(bytes: &[u8]) -> (&[u8], u16) {
    let (seed, n) = bytes.split_at(bytes.len() - 2);
    (seed, u16::from_le_bytes([n[0], n[1]]))
}

/// The challenge sampler as the hardware runs it: only the positions the
/// shuffle touches are written, so the target must be cleared first.
fn sample_in_ball_into(c: &mut [u32; N], seed: &[u8], tau: usize) -> Result<(), IsaError> {
    let q = q23().q();
    let mut stream = XofStream::new(HashMode::Shake256, &[seed], ExtractMode::Buffered192);
    let mut signs = stream.next_bits(64)?;
    for i in N - tau..N {
        let b = loop {
            let b = stream.next_bits(8)? as usize;
            if b <= i {
                break b;
            }
        };
        c[i] = c[b];
        c[b] = if signs & 1 == 1 { q - 1 } else { 1 };
        signs >>= 1;
    }
    Ok(())
}

impl Machine {
    pub fn new(memory: Memory) -> Self {
        Self {
            memory,
            registers: Registers::default(),
            session: None,
        }
    }

    fn session(&mut self, ins: &Instruction) -> Result<&mut XofStream, IsaError> {
        self.session.as_mut().ok_or_else(|| fail(ins, "no streaming session (SHAKE_RESET first)"))
    }

    fn poly(&self, op: &Operand) -> [u32; N] {
        self.memory.read_poly(op.poly())
    }

    fn bytes(&self, op: &Operand) -> Vec<u8> {
        self.memory.read_bytes(op.bytes())
    }

    fn put_poly(&mut self, op: &Operand, c: &[u32; N]) {
        self.memory.write_poly(op.poly(), c);
    }

    fn put_bytes(&mut self, op: &Operand, data: &[u8]) -> Result<(), IsaError> {
        self.memory.write_bytes(op.bytes(), data)
    }

    fn prime(ins: &Instruction) -> Result<PrimeCtx, IsaError> {
        let bits = ins.param(Param::Q).ok_or_else(|| fail(ins, "missing q"))?;
        Ok(PrimeCtx::from_bits(bits)?)
    }

    pub fn execute(&mut self, ins: &Instruction) -> Result<Flow, IsaError> {
        let ops = &ins.operands;
        match ins.opcode {
            Opcode::ResetKeccak => self.session = None,
            Opcode::Sha3_256 => {
                expect_len(ins, ops[0].bytes(), 32)?;
                let h = sha3_256(&self.bytes(&ops[1]));
                self.put_bytes(&ops[0], &h)?;
            }
            Opcode::Sha3_512 => {
                expect_len(ins, ops[0].bytes(), 64)?;
                let h = sha3_512(&self.bytes(&ops[1]));
                self.put_bytes(&ops[0], &h)?;
            }
            Opcode::Shake128 | Opcode::Shake256 => {
                let mode = if ins.opcode == Opcode::Shake128 {
                    HashMode::Shake128
                } else {
                    HashMode::Shake256
                };
                let out = shake(mode, &[&self.bytes(&ops[1])], ops[0].bytes().len as usize);
                self.put_bytes(&ops[0], &out)?;
            }
            Opcode::ShakeReset => {
                let hash = ins.param(Param::Hash).unwrap_or(128);
                let width = ins.param(Param::Width).unwrap_or(8);
                let mode = if width == 13 {
                    ExtractMode::Coeff13
                } else {
                    ExtractMode::Direct(width)
                };
                self.session = Some(XofStream::new(hash_mode(hash), &[&self.bytes(&ops[0])], mode));
            }
            Opcode::ShakeResume => {
                let dst = ops[0].bytes();
                let s = self.session(ins)?;
                let ExtractMode::Direct(w) = s.mode() else {
                    return Err(fail(ins, "session is not in direct mode"));
                };
                let bits = dst.len * 8;
                if bits % w != 0 {
                    return Err(fail(ins, format!("{} bytes is not a whole number of {w}-bit reads", dst.len)));
                }
                let vals = (0..bits / w).map(|_| s.next_bits(w).map(|v| v as u32)).collect::<Result<Vec<_>, _>>()?;
                let out = pack_bits(&vals, w);
                self.put_bytes(&ops[0], &out)?;
            }
            Opcode::Shake128W26 => {
                let s = self.session(ins)?;
                let mut c = [0u32; N];
                for k in (0..N).step_by(2) {
                    let (a, b) = s.next_coeff_pair()?;
                    c[k] = a as u32;
                    c[k + 1] = b as u32;
                }
                self.put_poly(&ops[0], &c);
            }
            Opcode::Bs2Polvec => {
                let bits = ins.param(Param::Bits).unwrap_or(0);
                expect_len(ins, ops[1].bytes(), N * bits as usize / 8)?;
                let v = unpack_bits(&self.bytes(&ops[1]), bits, N);
                self.put_poly(&ops[0], &v.try_into().expect("256 values"));
            }
            Opcode::Binomial => {
                let mu = ins.param(Param::Mu).unwrap_or(0);
                let s = self.session(ins)?;
                let mut c = [0u32; N];
                for x in c.iter_mut() {
                    *x = Modulus::SABER_Q.reduce_i64(sample_binomial(s, mu)? as i64);
                }
                self.put_poly(&ops[0], &c);
            }
            Opcode::RejUniform => {
                expect_len(ins, ops[1].bytes(), 34)?;
                let seed = self.bytes(&ops[1]);
                let (rho, nonce) = split_nonce(&seed);
                let p = uniform_poly(rho, nonce)?;
                self.put_poly(&ops[0], &p.coeffs);
            }
            Opcode::RejEta | Opcode::RejGamma => {
                expect_len(ins, ops[1].bytes(), 66)?;
                let seed = self.bytes(&ops[1]);
                let (s, nonce) = split_nonce(&seed);
                let p = if ins.opcode == Opcode::RejEta {
                    eta_poly(s, nonce, ins.param(Param::Eta).unwrap_or(0))?
                } else {
                    gamma_poly(s, nonce, ins.param(Param::Gamma1).unwrap_or(0))?
                };
                self.put_poly(&ops[0], &p.coeffs);
            }
            Opcode::PackDil | Opcode::EncodeH => {
                let kind = if ins.opcode == Opcode::EncodeH {
                    PackKind::W1(ins.param(Param::Gamma2).unwrap_or(0))
                } else {
                    pack_kind(ins)?
                };
                expect_len(ins, ops[0].bytes(), kind.bytes())?;
                let out = pack_poly(kind, &field_poly(self.poly(&ops[1])))?;
                self.put_bytes(&ops[0], &out)?;
            }
            Opcode::UnpackDil => {
                let kind = pack_kind(ins)?;
                expect_len(ins, ops[1].bytes(), kind.bytes())?;
                let mut c = unpack_poly(kind, &self.bytes(&ops[1]))?.coeffs;
                if let Some(s) = ins.param(Param::Shift) {
                    let q = q23();
                    for x in c.iter_mut() {
                        *x = q.reduce((*x as u64) << s);
                    }
                }
                self.put_poly(&ops[0], &c);
            }
            Opcode::PackHint => {
                let n = ins.poly_count();
                let omega = ins.param(Param::Omega).unwrap_or(0) as usize;
                expect_len(ins, ops[0].bytes(), omega + n)?;
                let base = ops[1].poly();
                let h = PolyVec::new((0..n).map(|k| field_poly(self.memory.read_poly(base.offset(k)))).collect())?;
                let out = pack_hint(&h, omega)?;
                self.put_bytes(&ops[0], &out)?;
            }
            Opcode::UnpackHint => {
                let n = ins.poly_count();
                let omega = ins.param(Param::Omega).unwrap_or(0) as usize;
                expect_len(ins, ops[1].bytes(), omega + n)?;
                let base = ops[0].poly();
                match unpack_hint(&self.bytes(&ops[1]), n, omega) {
                    Ok(h) => {
                        for (k, p) in h.polys.iter().enumerate() {
                            self.memory.write_poly(base.offset(k), &p.coeffs);
                        }
                    }
                    Err(_) => {
                        self.registers.reject = true;
                        for k in 0..n {
                            self.memory.write_poly(base.offset(k), &[0; N]);
                        }
                    }
                }
            }
            Opcode::Decompose => {
                let g2 = ins.param(Param::Gamma2).unwrap_or(0);
                let src = self.poly(&ops[2]);
                let q = q23();
                let mut hi = [0u32; N];
                let mut lo = [0u32; N];
                for k in 0..N {
                    let (r1, r0) = decompose(src[k], g2);
                    hi[k] = r1;
                    lo[k] = q.from_signed(r0 as i64);
                }
                self.put_poly(&ops[0], &hi);
                self.put_poly(&ops[1], &lo);
            }
            Opcode::VerifyDil => {
                if ins.is_branch() {
                    let omega = ins.param(Param::Omega).unwrap_or(0);
                    let r = &mut self.registers;
                    if r.reject || r.hints > omega {
                        r.reject = false;
                        r.kappa += 1;
                        return Ok(Flow::Loop);
                    }
                } else {
                    let bound = ins.param(Param::Bound).unwrap_or(0) as i64;
                    let q = q23();
                    if self.poly(&ops[0]).iter().any(|&c| q.centered(c).abs() >= bound) {
                        self.registers.reject = true;
                    }
                }
            }
            Opcode::Write => {
                expect_len(ins, ops[0].bytes(), 2)?;
                let v = ins.param(Param::Value).unwrap_or(0) + ins.param(Param::Step).unwrap_or(0) * self.registers.kappa;
                self.put_bytes(&ops[0], &(v as u16).to_le_bytes())?;
            }
            Opcode::Refresh => self.put_poly(&ops[0], &[0; N]),
            Opcode::Ntt | Opcode::Intt => {
                let ctx = Self::prime(ins)?;
                let mut c = self.poly(ops.get(1).unwrap_or(&ops[0]));
                let t = TwiddleTable::cached(ctx);
                if ins.opcode == Opcode::Ntt {
                    match ins.param(Param::Lift) {
                        Some(bits) => {
                            let centered = Poly::from_coeffs(Modulus::PowerOfTwo(bits), c).centered();
                            for (x, v) in c.iter_mut().zip(centered) {
                                *x = ctx.from_signed(v);
                            }
                        }
                        None => c.iter_mut().for_each(|x| *x %= ctx.q()),
                    }
                    forward_in_place(&mut c, t);
                } else {
                    c.iter_mut().for_each(|x| *x %= ctx.q());
                    inverse_in_place(&mut c, t);
                    if let Some(bits) = ins.param(Param::Round) {
                        let m = Modulus::PowerOfTwo(bits);
                        for x in c.iter_mut() {
                            *x = m.reduce_i64(ctx.centered(*x));
                        }
                    }
                }
                self.put_poly(&ops[0], &c);
            }
            Opcode::Pmul => {
                let ctx = Self::prime(ins)?;
                let a = self.poly(&ops[1]);
                let b = self.poly(&ops[2]);
                let acc = ins.param(Param::Acc).unwrap_or(0) != 0;
                let mut out = if acc { self.poly(&ops[0]) } else { [0; N] };
                for k in 0..N {
                    let p = ctx.mul(a[k] % ctx.q(), b[k] % ctx.q());
                    out[k] = ctx.add(out[k] % ctx.q(), p);
                }
                self.put_poly(&ops[0], &out);
            }
            Opcode::Padd | Opcode::Psub => {
                let a = self.poly(&ops[1]);
                let b = self.poly(&ops[2]);
                let sub = ins.opcode == Opcode::Psub;
                let mut out = [0u32; N];
                if let Some(qb) = ins.param(Param::Q) {
                    let ctx = PrimeCtx::from_bits(qb)?;
                    for k in 0..N {
                        let (x, y) = (a[k] % ctx.q(), b[k] % ctx.q());
                        out[k] = if sub { ctx.sub(x, y) } else { ctx.add(x, y) };
                    }
                } else {
                    let bits = ins.param(Param::M).unwrap_or(32);
                    let mask = if bits >= 32 { u32::MAX } else { (1u32 << bits) - 1 };
                    for k in 0..N {
                        out[k] = if sub { a[k].wrapping_sub(b[k]) } else { a[k].wrapping_add(b[k]) } & mask;
                    }
                }
                self.put_poly(&ops[0], &out);
            }
            Opcode::AddRound => {
                expect_len(ins, ops[0].bytes(), N * 10 / 8)?;
                let v = self.poly(&ops[1]);
                let r: Vec<u32> = v.iter().map(|&c| ((c + 4) >> 3) & 0x3ff).collect();
                self.put_bytes(&ops[0], &pack_bits(&r, 10))?;
            }
            Opcode::AddPack => {
                let p = saber_params(ins, ins.param(Param::Et).unwrap_or(0))?;
                expect_len(ins, ops[0].bytes(), p.scale_bytes())?;
                expect_len(ins, ops[2].bytes(), 32)?;
                let v = Poly::from_coeffs(Modulus::SABER_P, self.poly(&ops[1]).map(|c| c & 0x3ff));
                let msg: [u8; 32] = self.bytes(&ops[2]).try_into().expect("32 bytes");
                let out = add_pack(&v, &msg, &p);
                self.put_bytes(&ops[0], &out)?;
            }
            Opcode::UnpackMsg => {
                let p = saber_params(ins, ins.param(Param::Et).unwrap_or(0))?;
                expect_len(ins, ops[0].bytes(), 32)?;
                let v = Poly::from_coeffs(Modulus::SABER_P, self.poly(&ops[1]).map(|c| c & 0x3ff));
                let m = unpack_msg(&v, &self.bytes(&ops[2]), &p)?;
                self.put_bytes(&ops[0], &m)?;
            }
            Opcode::Pol2Bs => {
                let bits = ins.param(Param::Bits).unwrap_or(0);
                expect_len(ins, ops[0].bytes(), N * bits as usize / 8)?;
                let mask = (1u64 << bits) - 1;
                let v: Vec<u32> = self.poly(&ops[1]).iter().map(|&c| (c as u64 & mask) as u32).collect();
                self.put_bytes(&ops[0], &pack_bits(&v, bits))?;
            }
            Opcode::Verify => self.registers.cmp = self.bytes(&ops[0]) != self.bytes(&ops[1]),
            Opcode::Cmov => {
                if self.registers.cmp {
                    let src = self.bytes(&ops[1]);
                    self.put_bytes(&ops[0], &src)?;
                }
            }
            Opcode::Copy => match (&ops[0], &ops[1]) {
                (Operand::Poly(d), Operand::Poly(s)) => {
                    let c = self.memory.read_poly(*s);
                    self.memory.write_poly(*d, &c);
                }
                _ => {
                    let src = self.bytes(&ops[1]);
                    self.put_bytes(&ops[0], &src)?;
                }
            },
            Opcode::SampleInBall => {
                expect_len(ins, ops[1].bytes(), 32)?;
                let seed = self.bytes(&ops[1]);
                let mut c = self.poly(&ops[0]);
                sample_in_ball_into(&mut c, &seed, ins.param(Param::Tau).unwrap_or(0) as usize)?;
                self.put_poly(&ops[0], &c);
            }
            Opcode::Power2Round => {
                let src = self.poly(&ops[2]);
                let q = q23();
                let mut hi = [0u32; N];
                let mut lo = [0u32; N];
                for k in 0..N {
                    let (r1, r0) = power2round(src[k] % q.q());
                    hi[k] = r1;
                    lo[k] = q.from_signed(r0 as i64);
                }
                self.put_poly(&ops[0], &hi);
                self.put_poly(&ops[1], &lo);
            }
            Opcode::MakeHint => {
                let g2 = ins.param(Param::Gamma2).unwrap_or(0);
                let low = self.poly(&ops[1]);
                let high = self.poly(&ops[2]);
                let q = q23();
                let mut h = [0u32; N];
                for k in 0..N {
                    h[k] = make_hint_low(q.centered(low[k]) as i32, high[k], g2) as u32;
                }
                self.registers.hints += h.iter().sum::<u32>();
                self.put_poly(&ops[0], &h);
            }
            Opcode::UseHint => {
                let g2 = ins.param(Param::Gamma2).unwrap_or(0);
                let h = self.poly(&ops[1]);
                let r = self.poly(&ops[2]);
                let mut out = [0u32; N];
                for k in 0..N {
                    out[k] = use_hint(h[k] != 0, r[k], g2);
                }
                self.put_poly(&ops[0], &out);
            }
            Opcode::CounterRef => self.registers.hints = 0,
        }
        Ok(Flow::Next)
    }
}
