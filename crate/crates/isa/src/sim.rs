//! Serial and dual-lane execution with cycle accounting.

use std::fmt;
use std::str::FromStr;

use crate::cost::{units, CostTable};
use crate::error::IsaError;
use crate::exec::{Flow, Machine, Registers};
use crate::instr::Instruction;
use crate::memory::{Memory, BANKS};
use crate::opcode::{Lane, Opcode};
use crate::program::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One instruction per issue slot.
    Serial,
    /// `;par` pairs share a slot.
    Parallel,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Serial => "serial",
            Mode::Parallel => "parallel",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "serial" => Ok(Mode::Serial),
            "parallel" => Ok(Mode::Parallel),
            _ => Err(format!("unknown mode `{s}` (serial|parallel)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub costs: CostTable,
    /// Cycles between the start of an issue slot and its instructions
    /// starting, in both modes.
    pub issue_overhead: u64,
    /// Back edges allowed before giving up.
    pub max_iterations: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            costs: CostTable::shipped(),
            issue_overhead: 2,
            max_iterations: 256,
        }
    }
}

/// One executed instruction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    /// Position in the program.
    pub index: usize,
    /// Issue slot number (pairs share one).
    pub slot: usize,
    pub opcode: Opcode,
    pub lane: Lane,
    pub issue: u64,
    pub retire: u64,
    pub units: u64,
    pub operands: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub mode: Mode,
    pub rows: Vec<TraceRow>,
    pub total_cycles: u64,
    pub slots: usize,
    /// Times the loop body was entered through the back edge, plus one
    /// when the program has a loop.
    pub iterations: u32,
    /// Highest number of users of one bank port seen in any cycle.
    pub peak_port_use: u32,
}

impl Trace {
    /// Busy cycles of one lane.
    pub fn lane_busy(&self, lane: Lane) -> u64 {
        self.rows.iter().filter(|r| r.lane == lane).map(|r| r.retire - r.issue).sum()
    }

    /// Sum over slots of the gap between consecutive slot retirements.
    pub fn retire_gap_sum(&self) -> u64 {
        let mut last = 0u64;
        let mut sum = 0u64;
        let mut i = 0;
        while i < self.rows.len() {
            let slot = self.rows[i].slot;
            let mut end = 0;
            while i < self.rows.len() && self.rows[i].slot == slot {
                end = end.max(self.rows[i].retire);
                i += 1;
            }
            sum += end - last;
            last = end;
        }
        sum
    }

    /// `index,opcode,lane,issue,retire` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,opcode,lane,issue,retire\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.index, r.opcode, r.lane, r.issue, r.retire));
        }
        s
    }

    /// `key = value` summary block.
    pub fn summary(&self) -> String {
        let total = self.total_cycles.max(1) as f64;
        let pairs = self.rows.len() - self.slots;
        format!(
            "mode = {}\ninstructions = {}\nslots = {}\npairs = {}\niterations = {}\ntotal_cycles = {}\nset1_busy = {}\nset2_busy = {}\nset1_utilization = {:.4}\nset2_utilization = {:.4}\npeak_port_use = {}\n",
            self.mode,
            self.rows.len(),
            self.slots,
            pairs,
            self.iterations,
            self.total_cycles,
            self.lane_busy(Lane::Set1),
            self.lane_busy(Lane::Set2),
            self.lane_busy(Lane::Set1) as f64 / total,
            self.lane_busy(Lane::Set2) as f64 / total,
            self.peak_port_use,
        )
    }
}

/// Final state of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub memory: Memory,
    pub registers: Registers,
    pub trace: Trace,
}

fn overlaps(a: &std::ops::Range<usize>, b: &std::ops::Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

/// Why two instructions may not share a slot, or `None` when they can.
pub fn pair_conflict(a: &Instruction, b: &Instruction) -> Option<IsaError> {
    if a.lane() == b.lane() {
        return Some(IsaError::LaneViolation {
            line: 0,
            first: a.opcode.to_string(),
            second: b.opcode.to_string(),
            lane: a.lane().to_string(),
        });
    }
    if let Some(detail) = hazard(a, b) {
        return Some(IsaError::DataHazard { index: 0, detail });
    }
    let (pa, pb) = (a.ports(), b.ports());
    for (port, name) in [(0, "read"), (1, "write")] {
        for bank in 0..BANKS {
            if pa[port][bank] && pb[port][bank] {
                return Some(IsaError::BankConflict { cycle: 0, bank, port: name });
            }
        }
    }
    None
}

fn hazard(a: &Instruction, b: &Instruction) -> Option<String> {
    if a.is_branch() || b.is_branch() {
        return Some("the loop exit test cannot be paired".into());
    }
    for fa in a.footprint() {
        for fb in b.footprint() {
            if fa.bank == fb.bank && overlaps(&fa.words, &fb.words) {
                return Some(format!(
                    "{} and {} both use bank {} words {}..{}",
                    a.opcode,
                    b.opcode,
                    fa.bank,
                    fa.words.start.max(fb.words.start),
                    fa.words.end.min(fb.words.end)
                ));
            }
        }
    }
    let (ra, wa) = a.registers();
    let (rb, wb) = b.registers();
    for r in &wa {
        if rb.contains(r) || wb.contains(r) {
            return Some(format!("{} and {} both use register {r:?}", a.opcode, b.opcode));
        }
    }
    for r in &wb {
        if ra.contains(r) {
            return Some(format!("{} and {} both use register {r:?}", a.opcode, b.opcode));
        }
    }
    None
}

/// Per-cycle port accounting for the instructions of one slot.
fn check_ports(slot: &[(&Instruction, u64, u64)], peak: &mut u32) -> Result<(), IsaError> {
    let ports: Vec<[[bool; BANKS]; 2]> = slot.iter().map(|(i, _, _)| i.ports()).collect();
    let start = slot.iter().map(|s| s.1).min().unwrap_or(0);
    let end = slot.iter().map(|s| s.2).max().unwrap_or(0);
    for cycle in start..end {
        let mut use_count = [[0u32; BANKS]; 2];
        for (k, &(_, issue, retire)) in slot.iter().enumerate() {
            if (issue..retire).contains(&cycle) {
                for port in 0..2 {
                    for bank in 0..BANKS {
                        use_count[port][bank] += ports[k][port][bank] as u32;
                    }
                }
            }
        }
        for (port, name) in [(0, "read"), (1, "write")] {
            for bank in 0..BANKS {
                *peak = (*peak).max(use_count[port][bank]);
                if use_count[port][bank] > 1 {
                    return Err(IsaError::BankConflict { cycle, bank, port: name });
                }
            }
        }
    }
    Ok(())
}

/// Executes `program` on `memory`.
///
/// In parallel mode a `;par` pair issues together and the slot ends when
/// the slower instruction retires. The later instruction of a pair runs
/// first, so an undetected dependency would show up as a difference from
/// serial mode.
pub fn run(program: &Program, memory: Memory, mode: Mode, config: &SimConfig) -> Result<RunOutput, IsaError> {
    let instrs = program.instructions();
    let loop_start = program.loop_start();
    let mut m = Machine::new(memory);
    m.memory.load_instructions(program);
    let mut rows = Vec::new();
    let mut t = 0u64;
    let mut slots = 0usize;
    let mut peak = 0u32;
    let mut iterations = u32::from(loop_start.is_some());
    let mut pc = 0usize;
    while pc < instrs.len() {
        let width = if mode == Mode::Parallel && pc + 1 < instrs.len() && instrs[pc + 1].control.par() {
            2
        } else {
            1
        };
        let group = &instrs[pc..pc + width];
        if width == 2 {
            if let Some(detail) = hazard(&group[0], &group[1]) {
                return Err(IsaError::DataHazard { index: pc + 1, detail });
            }
        }
        let issue = t + config.issue_overhead;
        let timed: Vec<(&Instruction, u64, u64)> = group.iter().map(|i| (i, issue, issue + config.costs.cost(i))).collect();
        check_ports(&timed, &mut peak)?;

        let mut flow = Flow::Next;
        for ins in group.iter().rev() {
            if m.execute(ins)? == Flow::Loop {
                flow = Flow::Loop;
            }
        }
        for (k, &(ins, issue, retire)) in timed.iter().enumerate() {
            rows.push(TraceRow {
                index: pc + k,
                slot: slots,
                opcode: ins.opcode,
                lane: ins.lane(),
                issue,
                retire,
                units: units(ins),
                operands: ins.operands.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" "),
            });
        }
        t = timed.iter().map(|x| x.2).max().unwrap_or(t);
        slots += 1;

        match flow {
            Flow::Next => pc += width,
            Flow::Loop => {
                iterations += 1;
                if iterations > config.max_iterations {
                    return Err(IsaError::LoopLimit(config.max_iterations));
                }
                pc = loop_start.expect("validated programs mark their loop");
            }
        }
    }
    Ok(RunOutput {
        memory: m.memory,
        registers: m.registers,
        trace: Trace {
            mode,
            rows,
            total_cycles: t,
            slots,
            iterations,
            peak_port_use: peak,
        },
    })
}

/// Issue groups of one straight pass through `program`: pairs in
/// parallel mode, single instructions in serial mode. Branches fall
/// through.
pub fn issue_slots(program: &Program, mode: Mode) -> Vec<&[Instruction]> {
    let instrs = program.instructions();
    let mut out = Vec::new();
    let mut pc = 0;
    while pc < instrs.len() {
        let width = if mode == Mode::Parallel && pc + 1 < instrs.len() && instrs[pc + 1].control.par() { 2 } else { 1 };
        out.push(&instrs[pc..pc + width]);
        pc += width;
    }
    out
}

/// Cycles of one pass through `program` without executing it, as if
/// every loop test passed the first time.
pub fn one_pass_cycles(program: &Program, mode: Mode, config: &SimConfig) -> u64 {
    issue_slots(program, mode)
        .iter()
        .map(|g| config.issue_overhead + g.iter().map(|i| config.costs.cost(i)).max().unwrap_or(0))
        .sum()
}

/// Serial against parallel totals.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub serial_cycles: u64,
    pub parallel_cycles: u64,
    pub reduction_percent: f64,
    pub set1_busy: u64,
    pub set2_busy: u64,
    pub set1_utilization: f64,
    pub set2_utilization: f64,
}

pub fn cycle_report(serial: &Trace, parallel: &Trace) -> CycleReport {
    let s = serial.total_cycles;
    let p = parallel.total_cycles;
    let reduction = if s == 0 { 0.0 } else { 100.0 * (s as f64 - p as f64) / s as f64 };
    let total = p.max(1) as f64;
    CycleReport {
        serial_cycles: s,
        parallel_cycles: p,
        reduction_percent: reduction,
        set1_busy: parallel.lane_busy(Lane::Set1),
        set2_busy: parallel.lane_busy(Lane::Set2),
        set1_utilization: parallel.lane_busy(Lane::Set1) as f64 / total,
        set2_utilization: parallel.lane_busy(Lane::Set2) as f64 / total,
    }
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "serial_cycles = {}", self.serial_cycles)?;
        writeln!(f, "parallel_cycles = {}", self.parallel_cycles)?;
        writeln!(f, "reduction_percent = {:.2}", self.reduction_percent)?;
        writeln!(f, "set1_busy = {}", self.set1_busy)?;
        writeln!(f, "set2_busy = {}", self.set2_busy)?;
        writeln!(f, "set1_utilization = {:.4}", self.set1_utilization)?;
        writeln!(f, "set2_utilization = {:.4}", self.set2_utilization)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::load_program;

    fn go(text: &str, mode: Mode) -> RunOutput {
        run(&load_program(text).unwrap(), Memory::new(), mode, &SimConfig::default()).unwrap()
    }

    #[test]
    fn two_transforms_max_versus_sum() {
        // A Set-1 op pinned at 512 cycles is not available, so pair an NTT
        // with a Keccak op of matching cost under a uniform table.
        let text = "DECOMPOSE b2:0 b3:0 b2:64 b3:64 b2:128 b3:128 gamma2=95232\nNTT b0:0 b1:0 q=23 ;par\n";
        let mut cfg = SimConfig::default();
        let mut map: std::collections::BTreeMap<_, _> = CostTable::uniform(1).entries().collect();
        map.insert(Opcode::Decompose, 128);
        cfg.costs = CostTable::from_map(map).unwrap();
        let p = load_program(text).unwrap();
        let par = run(&p, Memory::new(), Mode::Parallel, &cfg).unwrap().trace;
        let ser = run(&p, Memory::new(), Mode::Serial, &cfg).unwrap().trace;
        assert_eq!(par.total_cycles, 512 + 2);
        assert_eq!(ser.total_cycles, 128 + 512 + 2 * 2);
        let text = "NTT b0:0 b1:0 q=23\nINTT b2:0 b3:0 q=23\n";
        let ser = go(text, Mode::Serial).trace;
        assert_eq!(ser.total_cycles, 1024 + 4);
    }

    #[test]
    fn pair_sharing_an_address_is_a_hazard() {
        let text = "SHAKE128 b0:0/32 b2:0/32\nPADD b0:0 b1:0 b0:64 b1:64 b0:128 b1:128 q=23 ;par\n";
        let e = run(&load_program(text).unwrap(), Memory::new(), Mode::Parallel, &SimConfig::default()).unwrap_err();
        assert!(matches!(e, IsaError::DataHazard { index: 1, .. }), "{e}");
        // Serial mode never pairs.
        go(text, Mode::Serial);
    }

    #[test]
    fn pair_on_one_port_is_a_bank_conflict() {
        let text = "SHAKE128 b0:200/32 b2:0/32\nPADD b0:0 b1:0 b0:64 b1:64 b0:128 b1:128 q=23 ;par\n";
        let e = run(&load_program(text).unwrap(), Memory::new(), Mode::Parallel, &SimConfig::default()).unwrap_err();
        assert!(matches!(e, IsaError::BankConflict { bank: 0, port: "write", .. }), "{e}");
    }

    #[test]
    fn disjoint_pair_runs() {
        let text = "SHAKE128 b2:200/32 b3:0/32\nPADD b0:0 b1:0 b0:64 b1:64 b0:128 b1:128 q=23 ;par\n";
        let out = go(text, Mode::Parallel);
        assert_eq!(out.trace.slots, 1);
        assert_eq!(out.trace.peak_port_use, 1);
        assert_eq!(out.trace.rows[0].issue, out.trace.rows[1].issue);
    }

    #[test]
    fn degenerate_programs() {
        let empty = go("", Mode::Parallel);
        assert_eq!(empty.trace.total_cycles, 0);
        assert!(empty.memory.same_data(&Memory::new()));
        let one = go("COUNTER_REF", Mode::Serial);
        assert_eq!(one.trace.rows.len(), 1);
        assert_eq!(one.trace.total_cycles, 2 + CostTable::shipped().per_unit(Opcode::CounterRef) as u64);
        let r = cycle_report(&one.trace, &one.trace);
        assert_eq!(r.reduction_percent, 0.0);
    }

    #[test]
    fn loop_limit_is_enforced() {
        let text = "COUNTER_REF ;loop\nVERIFY_DIL b0:0 b1:0 bound=0\nVERIFY_DIL omega=80\n";
        let e = run(&load_program(text).unwrap(), Memory::new(), Mode::Serial, &SimConfig::default()).unwrap_err();
        assert!(matches!(e, IsaError::LoopLimit(256)));
    }

    #[test]
    fn trace_exports() {
        let out = go("NTT b0:0 b1:0 q=23\nCOUNTER_REF\n", Mode::Serial);
        let csv = out.trace.to_csv();
        assert_eq!(csv.lines().next(), Some("index,opcode,lane,issue,retire"));
        assert_eq!(csv.lines().nth(1), Some("0,NTT,set2,2,514"));
        assert_eq!(out.trace.retire_gap_sum(), out.trace.total_cycles);
        assert!(out.trace.summary().contains("total_cycles = "));
    }
}
