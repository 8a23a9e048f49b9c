//! Least-squares calibration of the cost table.
//!
//! A program's one-pass total is linear in the per-unit costs once it is
//! known which instruction of every pair is the slower one. The fit
//! alternates between fixing that pattern and solving a non-negative
//! least-squares problem, keeping the best integer table seen.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::cost::{units, CostTable, FIXED};
use crate::error::IsaError;
use crate::opcode::Opcode;
use crate::program::Program;
use crate::sim::{issue_slots, one_pass_cycles, Mode, SimConfig};

/// What a target program should reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Goal {
    /// One-pass parallel cycle total.
    Cycles(f64),
    /// Parallel reduction against serial, in percent.
    Reduction(f64),
}

#[derive(Clone, Debug)]
pub struct FitTarget {
    pub name: String,
    pub program: Program,
    pub goal: Goal,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub issue_overhead: u64,
    /// Pull of each free cost toward its prior value, relative.
    pub prior_weight: f64,
    pub rounds: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            issue_overhead: 2,
            prior_weight: 0.05,
            rounds: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub name: String,
    pub goal: Goal,
    pub achieved: f64,
}

impl Residual {
    /// Relative error for totals, percentage points for reductions.
    pub fn error(&self) -> f64 {
        match self.goal {
            Goal::Cycles(t) => (self.achieved - t) / t,
            Goal::Reduction(r) => self.achieved - r,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub table: CostTable,
    pub residuals: Vec<Residual>,
    pub loss: f64,
}

/// Lawson-Hanson non-negative least squares: minimizes `|Ax - b|` over
/// `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-10;
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&cols);
            let z = sub.svd(true, true).solve(b, 1e-12).expect("svd solve");
            if z.iter().all(|&v| v > tol) {
                for (k, &c) in cols.iter().enumerate() {
                    x[c] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &c) in cols.iter().enumerate() {
                if z[k] <= tol {
                    alpha = alpha.min(x[c] / (x[c] - z[k]));
                }
            }
            for (k, &c) in cols.iter().enumerate() {
                x[c] += alpha * (z[k] - x[c]);
                if x[c] <= tol {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    x
}

fn achieved(t: &FitTarget, config: &SimConfig) -> f64 {
    let par = one_pass_cycles(&t.program, Mode::Parallel, config) as f64;
    match t.goal {
        Goal::Cycles(_) => par,
        Goal::Reduction(_) => {
            let ser = one_pass_cycles(&t.program, Mode::Serial, config) as f64;
            100.0 * (ser - par) / ser
        }
    }
}

fn evaluate(targets: &[FitTarget], table: &CostTable, overhead: u64) -> (Vec<Residual>, f64) {
    let config = SimConfig {
        costs: table.clone(),
        issue_overhead: overhead,
        ..SimConfig::default()
    };
    let residuals: Vec<Residual> = targets
        .iter()
        .map(|t| Residual {
            name: t.name.clone(),
            goal: t.goal,
            achieved: achieved(t, &config),
        })
        .collect();
    let loss = residuals
        .iter()
        .zip(targets)
        .map(|(r, t)| {
            let e = match r.goal {
                Goal::Cycles(_) => r.error(),
                Goal::Reduction(_) => r.error() / 100.0,
            };
            t.weight * e * e
        })
        .sum();
    (residuals, loss)
}

/// Linear form of a one-pass total under `table`: coefficients over the
/// free opcodes plus a constant.
fn linear_total(program: &Program, mode: Mode, table: &CostTable, free: &BTreeMap<Opcode, usize>, overhead: u64) -> (Vec<f64>, f64) {
    let mut coef = vec![0.0; free.len()];
    let mut constant = 0.0;
    for slot in issue_slots(program, mode) {
        constant += overhead as f64;
        let Some(dom) = slot.iter().max_by_key(|i| table.cost(i)) else { continue };
        let u = units(dom);
        match free.get(&dom.opcode) {
            Some(&k) if u > 0 => coef[k] += u as f64,
            _ => constant += table.cost(dom) as f64,
        }
    }
    (coef, constant)
}

/// Fits the free per-unit costs, starting from and regularized toward
/// `prior`.
pub fn fit_costs(targets: &[FitTarget], prior: &CostTable, opts: &FitOptions) -> Result<FitResult, IsaError> {
    let free: BTreeMap<Opcode, usize> = Opcode::ALL
        .iter()
        .filter(|o| !FIXED.iter().any(|(f, _)| f == *o))
        .enumerate()
        .map(|(k, &o)| (o, k))
        .collect();
    let n = free.len();
    let rows = targets.len() + n;

    let mut current = prior.clone();
    let (_, mut best_loss) = evaluate(targets, &current, opts.issue_overhead);
    let mut best = current.clone();

    for _ in 0..opts.rounds {
        let mut a = DMatrix::zeros(rows, n);
        let mut b = DVector::zeros(rows);
        for (r, t) in targets.iter().enumerate() {
            let w = t.weight.sqrt();
            let (pc, pk) = linear_total(&t.program, Mode::Parallel, &current, &free, opts.issue_overhead);
            match t.goal {
                Goal::Cycles(total) => {
                    for k in 0..n {
                        a[(r, k)] = w * pc[k] / total;
                    }
                    b[r] = w * (1.0 - pk / total);
                }
                Goal::Reduction(pct) => {
                    // (1 - r) S - P = 0, scaled by the current serial total.
                    let (sc, sk) = linear_total(&t.program, Mode::Serial, &current, &free, opts.issue_overhead);
                    let keep = 1.0 - pct / 100.0;
                    let scale = one_pass_cycles(&t.program, Mode::Serial, &SimConfig { costs: current.clone(), issue_overhead: opts.issue_overhead, ..SimConfig::default() }) as f64;
                    for k in 0..n {
                        a[(r, k)] = w * (keep * sc[k] - pc[k]) / scale;
                    }
                    b[r] = w * (pk - keep * sk) / scale;
                }
            }
        }
        for (&o, &k) in &free {
            let p = prior.per_unit(o) as f64;
            a[(targets.len() + k, k)] = opts.prior_weight / p;
            b[targets.len() + k] = opts.prior_weight;
        }
        let x = nnls(&a, &b);
        let mut map: BTreeMap<Opcode, u32> = current.entries().collect();
        for (&o, &k) in &free {
            // Half steps damp flips in the pair pattern.
            let old = current.per_unit(o) as f64;
            map.insert(o, ((old + x[k]) / 2.0).round().max(1.0) as u32);
        }
        let next = CostTable::from_map(map)?;
        if next == current {
            break;
        }
        current = next;
        let (_, loss) = evaluate(targets, &current, opts.issue_overhead);
        if loss < best_loss {
            best_loss = loss;
            best = current.clone();
        }
    }
    let (residuals, loss) = evaluate(targets, &best, opts.issue_overhead);
    Ok(FitResult {
        table: best,
        residuals,
        loss,
    })
}
