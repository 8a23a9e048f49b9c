use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsaError {
    #[error("line {line}: unknown opcode `{name}`")]
    UnknownOpcode { line: usize, name: String },
    #[error("line {line}: {first} and {second} share lane {lane} and cannot be paired")]
    LaneViolation {
        line: usize,
        first: String,
        second: String,
        lane: String,
    },
    #[error("line {line}: operand {operand} is outside the data memory")]
    AddressOutOfRange { line: usize, operand: String },
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("instruction {index}: data hazard in parallel pair: {detail}")]
    DataHazard { index: usize, detail: String },
    #[error("cycle {cycle}: bank {bank} {port} port used twice")]
    BankConflict { cycle: u64, bank: usize, port: &'static str },
    #[error("execution failed: {0}")]
    Execution(String),
    #[error("loop did not exit within {0} iterations")]
    LoopLimit(u32),
    #[error("unsupported builtin: {0}")]
    UnsupportedBuiltin(String),
    #[error("cost table: {0}")]
    CostTable(String),
}

impl From<pqproc_core::Error> for IsaError {
    fn from(e: pqproc_core::Error) -> Self {
        IsaError::Execution(e.to_string())
    }
}
