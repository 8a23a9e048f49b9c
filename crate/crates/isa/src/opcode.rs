//! Opcodes, their lanes and operand shapes.

use std::fmt;
use std::str::FromStr;

/// Execution lane. Set-1 holds the Keccak-side units, Set-2 the arithmetic
/// side; one instruction of each may be issued together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lane {
    Set1,
    Set2,
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lane::Set1 => "set1",
            Lane::Set2 => "set2",
        })
    }
}

/// Whether an operand is read, written or both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
    ReadWrite,
}

impl Access {
    pub fn reads(self) -> bool {
        matches!(self, Access::Read | Access::ReadWrite)
    }

    pub fn writes(self) -> bool {
        matches!(self, Access::Write | Access::ReadWrite)
    }
}

/// What an operand slot accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    /// A polynomial: two half locations in different banks.
    Poly,
    /// A byte buffer.
    Bytes,
    /// Either, as long as both operands of the instruction agree.
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub access: Access,
}

const fn slot(kind: SlotKind, access: Access) -> Slot {
    Slot { kind, access }
}

const WP: Slot = slot(SlotKind::Poly, Access::Write);
const RP: Slot = slot(SlotKind::Poly, Access::Read);
const RWP: Slot = slot(SlotKind::Poly, Access::ReadWrite);
const WB: Slot = slot(SlotKind::Bytes, Access::Write);
const RB: Slot = slot(SlotKind::Bytes, Access::Read);
const RWB: Slot = slot(SlotKind::Bytes, Access::ReadWrite);
const WA: Slot = slot(SlotKind::Any, Access::Write);
const RA: Slot = slot(SlotKind::Any, Access::Read);

/// Named instruction parameters (`key=value` in program text).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    /// Prime width of the field (23, 24 or 25).
    Q,
    /// Power-of-two modulus width for additions in `Z_{2^m}`.
    M,
    /// Read the input as `lift`-bit values and map them centered into the field.
    Lift,
    /// Center the output and reduce it modulo `2^round`.
    Round,
    Bits,
    Mu,
    Eta,
    Gamma1,
    Gamma2,
    Tau,
    Omega,
    /// Number of consecutive polynomials covered by a vector operand.
    N,
    Value,
    Step,
    Bound,
    /// 128 or 256.
    Hash,
    /// Extraction width of a streaming session (13 selects coefficient pairs).
    Width,
    /// Accumulate into the destination instead of overwriting it.
    Acc,
    Shift,
    Et,
    /// Codec for Dilithium packing; see [`PackCode`].
    Kind,
}

impl Param {
    pub const ALL: [Param; 21] = [
        Param::Q,
        Param::M,
        Param::Lift,
        Param::Round,
        Param::Bits,
        Param::Mu,
        Param::Eta,
        Param::Gamma1,
        Param::Gamma2,
        Param::Tau,
        Param::Omega,
        Param::N,
        Param::Value,
        Param::Step,
        Param::Bound,
        Param::Hash,
        Param::Width,
        Param::Acc,
        Param::Shift,
        Param::Et,
        Param::Kind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Q => "q",
            Param::M => "m",
            Param::Lift => "lift",
            Param::Round => "round",
            Param::Bits => "bits",
            Param::Mu => "mu",
            Param::Eta => "eta",
            Param::Gamma1 => "gamma1",
            Param::Gamma2 => "gamma2",
            Param::Tau => "tau",
            Param::Omega => "omega",
            Param::N => "n",
            Param::Value => "value",
            Param::Step => "step",
            Param::Bound => "bound",
            Param::Hash => "hash",
            Param::Width => "width",
            Param::Acc => "acc",
            Param::Shift => "shift",
            Param::Et => "et",
            Param::Kind => "kind",
        }
    }

    /// Stable numeric id used by the binary encoding.
    pub fn id(self) -> u8 {
        Param::ALL.iter().position(|&p| p == self).expect("listed") as u8
    }

    pub fn from_id(id: u8) -> Option<Param> {
        Param::ALL.get(id as usize).copied()
    }
}

impl FromStr for Param {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Param::ALL.iter().copied().find(|p| p.name() == s).ok_or(())
    }
}

/// Values of the `kind=` parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackCode {
    T1 = 0,
    T0 = 1,
    Eta = 2,
    Z = 3,
    W1 = 4,
}

impl PackCode {
    pub const ALL: [PackCode; 5] = [PackCode::T1, PackCode::T0, PackCode::Eta, PackCode::Z, PackCode::W1];

    pub fn name(self) -> &'static str {
        match self {
            PackCode::T1 => "t1",
            PackCode::T0 => "t0",
            PackCode::Eta => "eta",
            PackCode::Z => "z",
            PackCode::W1 => "w1",
        }
    }

    pub fn from_code(v: u32) -> Option<PackCode> {
        PackCode::ALL.get(v as usize).copied()
    }

    pub fn parse(s: &str) -> Option<PackCode> {
        PackCode::ALL.iter().copied().find(|k| k.name() == s)
    }
}

macro_rules! opcodes {
    ($( $v:ident => $text:literal, $lane:ident, $row:literal; )*) => {
        /// One instruction per unit of the processor.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Opcode { $( $v, )* }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[ $( Opcode::$v, )* ];

            pub fn mnemonic(self) -> &'static str {
                match self { $( Opcode::$v => $text, )* }
            }

            pub fn lane(self) -> Lane {
                match self { $( Opcode::$v => Lane::$lane, )* }
            }

            /// The hardware unit (instruction-list row) this opcode belongs to.
            pub fn unit(self) -> &'static str {
                match self { $( Opcode::$v => $row, )* }
            }
        }
    };
}

opcodes! {
    ResetKeccak => "RESET_KECCAK", Set1, "Reset Keccak";
    Sha3_256 => "SHA3_256", Set1, "SHA-256/512";
    Sha3_512 => "SHA3_512", Set1, "SHA-256/512";
    Shake128 => "SHAKE128", Set1, "SHAKE-128/256";
    Shake256 => "SHAKE256", Set1, "SHAKE-128/256";
    ShakeReset => "SHAKE_RESET", Set1, "SHAKE intermediate reset";
    ShakeResume => "SHAKE_RESUME", Set1, "SHAKE resume";
    Shake128W26 => "SHAKE128_W26", Set1, "SHAKE-128 (writing 26 bits)";
    Bs2Polvec => "BS2POLVEC", Set1, "BS2POLVEC";
    Binomial => "BINOMIAL", Set1, "Binomial sampler";
    RejUniform => "REJ_UNIFORM", Set1, "SHAKE-128 rejection [0, q-1]";
    RejEta => "REJ_ETA", Set1, "SHAKE-256 rejection eta";
    RejGamma => "REJ_GAMMA", Set1, "SHAKE-256 rejection gamma";
    PackDil => "PACK_DIL", Set1, "Pack-Unpack (Dilithium)";
    UnpackDil => "UNPACK_DIL", Set1, "Pack-Unpack (Dilithium)";
    PackHint => "PACK_HINT", Set1, "Pack-Unpack (Dilithium)";
    UnpackHint => "UNPACK_HINT", Set1, "Pack-Unpack (Dilithium)";
    Decompose => "DECOMPOSE", Set1, "Decompose/Verify (Dilithium)";
    VerifyDil => "VERIFY_DIL", Set1, "Decompose/Verify (Dilithium)";
    Write => "WRITE", Set1, "Write Inst./Refresh Memory";
    Refresh => "REFRESH", Set1, "Write Inst./Refresh Memory";
    Ntt => "NTT", Set2, "NTT";
    Intt => "INTT", Set2, "INTT";
    Pmul => "PMUL", Set2, "Coefficient-wise mul/add/sub";
    Padd => "PADD", Set2, "Coefficient-wise mul/add/sub";
    Psub => "PSUB", Set2, "Coefficient-wise mul/add/sub";
    AddRound => "ADDROUND", Set2, "AddRound/AddPack";
    AddPack => "ADDPACK", Set2, "AddRound/AddPack";
    UnpackMsg => "UNPACK_MSG", Set2, "Unpack (Saber)";
    Pol2Bs => "POL2BS", Set2, "Unpack (Saber)";
    Verify => "VERIFY", Set2, "Verify/CMOV/COPY";
    Cmov => "CMOV", Set2, "Verify/CMOV/COPY";
    Copy => "COPY", Set2, "Verify/CMOV/COPY";
    SampleInBall => "SAMPLE_IN_BALL", Set2, "SampleInBall";
    EncodeH => "ENCODE_H", Set2, "Encode_H";
    Power2Round => "POWER2ROUND", Set2, "Power2Round";
    MakeHint => "MAKEHINT", Set2, "MakeHint";
    UseHint => "USEHINT", Set2, "UseHint";
    CounterRef => "COUNTER_REF", Set2, "Counter_ref";
}

/// Operand and parameter layout of an opcode.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub slots: &'static [Slot],
    /// How many trailing slots may be left out.
    pub optional_slots: usize,
    pub required: &'static [Param],
    pub optional: &'static [Param],
}

const fn shape(slots: &'static [Slot], optional_slots: usize, required: &'static [Param], optional: &'static [Param]) -> Shape {
    Shape {
        slots,
        optional_slots,
        required,
        optional,
    }
}

impl Opcode {
    pub fn shape(self) -> Shape {
        use Param::*;
        match self {
            Opcode::ResetKeccak | Opcode::CounterRef => shape(&[], 0, &[], &[]),
            Opcode::Sha3_256 | Opcode::Sha3_512 | Opcode::Shake128 | Opcode::Shake256 => shape(&[WB, RB], 0, &[], &[]),
            Opcode::ShakeReset => shape(&[RB], 0, &[Hash, Width], &[]),
            Opcode::ShakeResume => shape(&[WB], 0, &[], &[]),
            Opcode::Shake128W26 => shape(&[WP], 0, &[], &[]),
            Opcode::Bs2Polvec => shape(&[WP, RB], 0, &[Bits], &[]),
            Opcode::Binomial => shape(&[WP], 0, &[Mu], &[]),
            Opcode::RejUniform => shape(&[WP, RB], 0, &[], &[]),
            Opcode::RejEta => shape(&[WP, RB], 0, &[Eta], &[]),
            Opcode::RejGamma => shape(&[WP, RB], 0, &[Gamma1], &[]),
            Opcode::PackDil => shape(&[WB, RP], 0, &[Kind], &[Eta, Gamma1, Gamma2]),
            Opcode::UnpackDil => shape(&[WP, RB], 0, &[Kind], &[Eta, Gamma1, Gamma2, Shift]),
            Opcode::PackHint => shape(&[WB, RP], 0, &[N, Omega], &[]),
            Opcode::UnpackHint => shape(&[WP, RB], 0, &[N, Omega], &[]),
            Opcode::Decompose => shape(&[WP, WP, RP], 0, &[Gamma2], &[]),
            // With an operand: norm check against `bound`. Without: loop exit test.
            Opcode::VerifyDil => shape(&[RP], 1, &[], &[Bound, Omega]),
            Opcode::Write => shape(&[WB], 0, &[Value], &[Step]),
            Opcode::Refresh => shape(&[WP], 0, &[], &[]),
            Opcode::Ntt => shape(&[RWP, RP], 1, &[Q], &[Lift]),
            Opcode::Intt => shape(&[RWP, RP], 1, &[Q], &[Round]),
            Opcode::Pmul => shape(&[WP, RP, RP], 0, &[Q], &[Acc]),
            Opcode::Padd | Opcode::Psub => shape(&[WP, RP, RP], 0, &[], &[Q, M]),
            Opcode::AddRound => shape(&[WB, RP], 0, &[], &[]),
            Opcode::AddPack => shape(&[WB, RP, RB], 0, &[Et], &[]),
            Opcode::UnpackMsg => shape(&[WB, RP, RB], 0, &[Et], &[]),
            Opcode::Pol2Bs => shape(&[WB, RP], 0, &[Bits], &[]),
            Opcode::Verify => shape(&[RB, RB], 0, &[], &[]),
            Opcode::Cmov => shape(&[RWB, RB], 0, &[], &[]),
            Opcode::Copy => shape(&[WA, RA], 0, &[], &[]),
            Opcode::SampleInBall => shape(&[RWP, RB], 0, &[Tau], &[]),
            Opcode::EncodeH => shape(&[WB, RP], 0, &[Gamma2], &[]),
            Opcode::Power2Round => shape(&[WP, WP, RP], 0, &[], &[]),
            Opcode::MakeHint => shape(&[WP, RP, RP], 0, &[Gamma2], &[]),
            Opcode::UseHint => shape(&[WP, RP, RP], 0, &[Gamma2], &[]),
        }
    }

    /// Stable numeric id used by the binary encoding.
    pub fn id(self) -> u8 {
        Opcode::ALL.iter().position(|&o| o == self).expect("listed") as u8
    }

    pub fn from_id(id: u8) -> Option<Opcode> {
        Opcode::ALL.get(id as usize).copied()
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for Opcode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let up = s.to_ascii_uppercase();
        Opcode::ALL.iter().copied().find(|o| o.mnemonic() == up).ok_or(())
    }
}
