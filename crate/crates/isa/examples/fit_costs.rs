//! Refits the shipped cost table against published cycle totals and
//! parallel reductions. Writes `calibration/costs.txt` and
//! `calibration/residuals.txt`.
//!
//! cargo run --release -p pqproc-isa --example fit_costs

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pqproc_isa::fit::{fit_costs, FitOptions, FitTarget, Goal};
use pqproc_isa::{builtin_program, CostTable};

const SABER: [&str; 3] = ["lightsaber", "saber", "firesaber"];
const DILITHIUM: [&str; 3] = ["2", "3", "5"];

/// Published one-pass totals per level.
const TOTALS: [(&str, &str, [f64; 3]); 8] = [
    ("saber", "keygen", [5935.0, 10980.0, 17523.0]),
    ("saber", "encaps", [8081.0, 13941.0, 21603.0]),
    ("saber", "decaps", [11678.0, 18991.0, 27890.0]),
    ("dilithium", "keygen", [14183.0, 22957.0, 38841.0]),
    ("dilithium", "sign_pre", [7554.0, 9273.0, 12448.0]),
    ("dilithium", "sign_loop", [21115.0, 35865.0, 52955.0]),
    ("dilithium", "sign_post", [1689.0, 2280.0, 3057.0]),
    ("dilithium", "verify", [15044.0, 25535.0, 45789.0]),
];

/// Published parallel reductions in percent.
const REDUCTIONS: [(&str, &str, [f64; 3]); 2] = [("saber", "decaps", [10.0, 13.0, 15.0]), ("dilithium", "sign", [20.0, 25.0, 28.0])];

fn levels(scheme: &str) -> [&'static str; 3] {
    if scheme == "saber" { SABER } else { DILITHIUM }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("calibration");
    let prior: CostTable = fs::read_to_string(dir.join("prior.txt")).expect("prior table").parse().expect("valid prior");

    let mut targets = Vec::new();
    for (scheme, op, values) in TOTALS {
        for (level, v) in levels(scheme).into_iter().zip(values) {
            let program = builtin_program(scheme, op, level).expect("builtin").program;
            targets.push(FitTarget { name: format!("{scheme} {op} {level} cycles"), program, goal: Goal::Cycles(v), weight: 1.0 });
        }
    }
    for (scheme, op, values) in REDUCTIONS {
        for (level, v) in levels(scheme).into_iter().zip(values) {
            let program = builtin_program(scheme, op, level).expect("builtin").program;
            targets.push(FitTarget { name: format!("{scheme} {op} {level} reduction"), program, goal: Goal::Reduction(v), weight: 12.0 });
        }
    }

    let result = fit_costs(&targets, &prior, &FitOptions::default()).expect("fit");

    let mut costs = String::from("# Fitted per-unit cycle costs. Regenerate with the fit_costs example.\n");
    costs.push_str(&result.table.to_string());
    fs::write(dir.join("costs.txt"), costs).expect("write costs");

    let mut res = String::from("# target goal achieved error (relative for cycles, points for reductions)\n");
    for r in &result.residuals {
        let goal = match r.goal {
            Goal::Cycles(v) => format!("{v:.0}"),
            Goal::Reduction(v) => format!("{v:.1}%"),
        };
        let _ = writeln!(res, "{:34} {:>8} {:>10.1} {:>+8.3}", r.name, goal, r.achieved, r.error());
    }
    let _ = writeln!(res, "# weighted loss {:.5}", result.loss);
    fs::write(dir.join("residuals.txt"), &res).expect("write residuals");
    print!("{res}");
}
