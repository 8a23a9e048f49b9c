//! Instruction-set simulator for the dual-lane cryptoprocessor.
//!
//! Programs are text listings of opcodes over a four-bank data memory.
//! Each opcode belongs to one of two lanes; a `;par` suffix issues an
//! instruction together with the one before it.

pub mod builtin;
pub mod cost;
pub mod error;
pub mod exec;
pub mod fit;
pub mod generate;
pub mod instr;
pub mod memory;
pub mod opcode;
pub mod program;
pub mod sim;

pub use builtin::{builtin_program, builtin_program_with, verify_accepted, Builtin, BuiltinOptions};
pub use cost::CostTable;
pub use error::IsaError;
pub use exec::{Machine, Registers};
pub use instr::{ByteLoc, Instruction, Loc, Operand, PolyLoc};
pub use memory::Memory;
pub use opcode::{Lane, Opcode, Param};
pub use program::{load_program, Program};
pub use sim::{cycle_report, issue_slots, one_pass_cycles, run, CycleReport, Mode, RunOutput, SimConfig, Trace, TraceRow};
