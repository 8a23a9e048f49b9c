//! Memory-access schedule for the two-bank NTT datapath.
//!
//! Coefficients are stored two per word and spread over two banks so every
//! issue slot reads one word from each bank and feeds two butterfly cores.
//! At the stage with butterfly distance `L`, a coefficient's bank is bit
//! `log2(L)` of its index. Outputs are written back through a FIFO of
//! addresses freed by earlier reads, after a configurable pipeline delay.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::Error;

/// Default pipeline depth between a read and the corresponding write.
pub const DEFAULT_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rw {
    Read,
    Write,
}

impl Rw {
    fn as_str(self) -> &'static str {
        match self {
            Rw::Read => "r",
            Rw::Write => "w",
        }
    }
}

/// One memory port event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Access {
    pub cycle: usize,
    pub bank: u8,
    pub word: usize,
    pub rw: Rw,
    pub stage: usize,
    /// Coefficient indices held by the word.
    pub coeffs: [usize; 2],
}

/// One issue slot: two butterflies fed by one word from each bank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub cycle: usize,
    pub stage: usize,
    /// Butterfly distance of the stage.
    pub len: usize,
    /// Read word per bank, indexed by bank.
    pub reads: [Access; 2],
    /// The two butterflies as (top, bottom) coefficient indices.
    pub butterflies: [(usize, usize); 2],
    pub writes: [Access; 2],
}

#[derive(Clone, Debug)]
pub struct BankSchedule {
    pub n: usize,
    pub depth: usize,
    pub slots: Vec<Slot>,
    /// Idle issue cycles spent waiting for a word still in flight.
    pub stall_cycles: usize,
}

/// Result of scanning a schedule for port and data hazards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub read_after_write: usize,
    pub write_after_read: usize,
    pub port_overuse: usize,
}

impl ConflictReport {
    pub fn is_clean(&self) -> bool {
        *self == ConflictReport::default()
    }
}

#[derive(Clone, Copy)]
struct Location {
    bank: u8,
    addr: usize,
    ready: usize,
}

impl BankSchedule {
    /// Number of butterfly issue slots.
    pub fn issue_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn butterflies(&self) -> usize {
        self.slots.len() * 2
    }

    /// Cycles from the first read to the last issue slot.
    pub fn issue_cycles(&self) -> usize {
        self.slots.last().map_or(0, |s| s.cycle + 1)
    }

    /// All accesses ordered by cycle, reads before writes within a cycle.
    pub fn accesses(&self) -> Vec<Access> {
        let mut all: Vec<Access> = self
            .slots
            .iter()
            .flat_map(|s| s.reads.iter().chain(s.writes.iter()).copied())
            .collect();
        all.sort_by_key(|a| (a.cycle, a.rw == Rw::Write, a.bank));
        all
    }

    /// CSV with columns `slot,bank,word,rw,stage`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,bank,word,rw,stage\n");
        for a in self.accesses() {
            let _ = writeln!(out, "{},{},{},{},{}", a.cycle, a.bank, a.word, a.rw.as_str(), a.stage);
        }
        out
    }

    /// Replays the trace against a model memory and counts hazards.
    ///
    /// A read must find its word already written at an earlier cycle, a
    /// write must only overwrite a word that was read at an earlier cycle,
    /// and each bank serves at most one read and one write per cycle.
    pub fn scan_conflicts(&self) -> ConflictReport {
        let words = self.n / 4;
        let mut report = ConflictReport::default();
        // (word contents, cycle written, cycle last read)
        let mut mem: Vec<Vec<(Option<[usize; 2]>, usize, Option<usize>)>> =
            vec![vec![(None, 0, None); words]; 2];
        for m in 0..self.n / 2 {
            let (bank, addr) = canonical_location(self.n, 2 * m);
            mem[bank as usize][addr] = (Some([2 * m, 2 * m + 1]), 0, None);
        }
        let mut ports: std::collections::HashMap<(usize, u8, bool), usize> = Default::default();
        for a in self.accesses() {
            let n_port = ports.entry((a.cycle, a.bank, a.rw == Rw::Write)).or_default();
            *n_port += 1;
            if *n_port > 1 {
                report.port_overuse += 1;
            }
            let cell = &mut mem[a.bank as usize][a.word];
            match a.rw {
                Rw::Read => {
                    let fresh = cell.0 == Some(a.coeffs) && (cell.1 < a.cycle || cell.1 == 0);
                    if !fresh {
                        report.read_after_write += 1;
                    }
                    cell.2 = Some(a.cycle);
                }
                Rw::Write => {
                    let consumed = matches!(cell.2, Some(r) if r < a.cycle && r >= cell.1);
                    if cell.0.is_some() && !consumed {
                        report.write_after_read += 1;
                    }
                    *cell = (Some(a.coeffs), a.cycle, None);
                }
            }
        }
        report
    }
}

/// Initial layout: bank is the top index bit, words hold adjacent pairs.
pub fn canonical_location(n: usize, coeff: usize) -> (u8, usize) {
    let half = n / 2;
    (((coeff / half) & 1) as u8, (coeff % half) / 2)
}

/// Builds the full forward-transform schedule for `n` coefficients
/// (256, or 16 for the small worked example) with pipeline depth `depth`.
pub fn emit_bank_schedule(n: usize, depth: usize) -> Result<BankSchedule, Error> {
    if !n.is_power_of_two() || n < 8 {
        return Err(Error::Malformed(format!("schedule size {n} must be a power of two >= 8")));
    }
    let stages = n.trailing_zeros() as usize;
    let top = n / 2;
    let bank_at = |coeff: usize, len: usize| -> u8 { ((coeff / len) & 1) as u8 };

    // loc[c] describes the word whose first coefficient is c.
    let mut loc: Vec<Option<Location>> = vec![None; n];
    for m in 0..n / 2 {
        let (bank, addr) = canonical_location(n, 2 * m);
        loc[2 * m] = Some(Location { bank, addr, ready: 0 });
    }

    let mut slots = Vec::with_capacity(n / 4 * stages);
    let mut cycle = 0usize;
    let mut stall_cycles = 0usize;
    let mut last_write = [None::<usize>; 2];

    for stage in 0..stages {
        let len = n >> (stage + 1);
        // (bank0 word, bank1 word, butterflies, output words)
        struct Group {
            words: [[usize; 2]; 2],
            bflies: [(usize, usize); 2],
            outputs: [[usize; 2]; 2],
        }
        let mut groups = Vec::new();
        if len >= 2 {
            for b in (0..n).step_by(2).filter(|b| b & len == 0) {
                let outputs = if len == 2 {
                    [[b, b + 2], [b + 1, b + 3]]
                } else {
                    [[b, b + 1], [b + len, b + len + 1]]
                };
                groups.push(Group {
                    words: [[b, b + 1], [b + len, b + len + 1]],
                    bflies: [(b, b + len), (b + 1, b + len + 1)],
                    outputs,
                });
            }
        } else {
            for b in (0..n).step_by(4) {
                groups.push(Group {
                    words: [[b, b + 2], [b + 1, b + 3]],
                    bflies: [(b, b + 1), (b + 2, b + 3)],
                    outputs: [[b, b + 1], [b + 2, b + 3]],
                });
            }
        }

        // Destination bank of each output word under the next layout.
        let dest = |w: [usize; 2]| -> u8 {
            match len {
                1 => bank_at(w[0], top),
                2 => bank_at(w[0], 1),
                _ => bank_at(w[0], len / 2),
            }
        };

        // Groups whose two outputs land in the same bank are interleaved with
        // a group targeting the other bank so writes stay one per bank per cycle.
        let mut balanced = Vec::new();
        let mut to_bank: [VecDeque<Group>; 2] = [VecDeque::new(), VecDeque::new()];
        for g in groups {
            let d = [dest(g.outputs[0]), dest(g.outputs[1])];
            if d[0] != d[1] {
                balanced.push(g);
            } else {
                to_bank[d[0] as usize].push_back(g);
            }
        }
        let mut order = balanced;
        while !to_bank[0].is_empty() || !to_bank[1].is_empty() {
            for q in to_bank.iter_mut() {
                if let Some(g) = q.pop_front() {
                    order.push(g);
                }
            }
        }

        let mut freed: [VecDeque<(usize, usize)>; 2] = [VecDeque::new(), VecDeque::new()];
        let mut produced: [VecDeque<([usize; 2], usize, usize)>; 2] = [VecDeque::new(), VecDeque::new()];
        let first_slot = slots.len();

        for g in &order {
            let l0 = loc[g.words[0][0]].expect("word present");
            let l1 = loc[g.words[1][0]].expect("word present");
            debug_assert_eq!((l0.bank, l1.bank), (0, 1));
            let start = cycle.max(l0.ready).max(l1.ready);
            stall_cycles += start - cycle;
            let read = |l: Location, w: [usize; 2]| Access {
                cycle: start,
                bank: l.bank,
                word: l.addr,
                rw: Rw::Read,
                stage,
                coeffs: w,
            };
            let reads = [read(l0, g.words[0]), read(l1, g.words[1])];
            freed[0].push_back((l0.addr, start));
            freed[1].push_back((l1.addr, start));
            loc[g.words[0][0]] = None;
            loc[g.words[1][0]] = None;
            let slot_index = slots.len();
            for (k, w) in g.outputs.iter().enumerate() {
                produced[dest(*w) as usize].push_back((*w, start + depth, slot_index * 2 + k));
            }
            slots.push(Slot {
                cycle: start,
                stage,
                len,
                reads,
                butterflies: g.bflies,
                writes: [reads[0], reads[1]],
            });
            cycle = start + 1;
        }

        for bank in 0..2u8 {
            let outs = std::mem::take(&mut produced[bank as usize]);
            for (w, ready_at, tag) in outs {
                let (addr, freed_at) = freed[bank as usize]
                    .pop_front()
                    .expect("every bank frees as many words as it receives");
                let mut at = ready_at.max(freed_at + 1);
                if let Some(prev) = last_write[bank as usize] {
                    at = at.max(prev + 1);
                }
                last_write[bank as usize] = Some(at);
                let access = Access {
                    cycle: at,
                    bank,
                    word: addr,
                    rw: Rw::Write,
                    stage,
                    coeffs: w,
                };
                let slot = &mut slots[tag / 2];
                debug_assert!(tag / 2 >= first_slot);
                slot.writes[tag % 2] = access;
                loc[w[0]] = Some(Location {
                    bank,
                    addr,
                    ready: at + 1,
                });
            }
        }
    }

    Ok(BankSchedule {
        n,
        depth,
        slots,
        stall_cycles,
    })
}
