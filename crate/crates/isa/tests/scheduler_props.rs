//! Generated programs behave the same in both modes.

use std::cell::Cell;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pqproc_isa::generate::{random_memory, random_program};
use pqproc_isa::{run, Lane, Mode, SimConfig};

#[test]
fn parallel_matches_serial_on_generated_programs() {
    let started = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let paired = Cell::new(0usize);
    let cases = Cell::new(0usize);
    let cfg = SimConfig::default();
    runner
        .run(&(any::<u64>(), 0usize..24), |(seed, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let prog = random_program(&mut rng, len);
            let mem = random_memory(&mut rng);
            let ser = run(&prog, mem.clone(), Mode::Serial, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let par = run(&prog, mem, Mode::Parallel, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(ser.memory.same_data(&par.memory), "memory differs for\n{prog}");
            prop_assert_eq!(&ser.registers, &par.registers);
            prop_assert!(par.trace.total_cycles <= ser.trace.total_cycles);
            prop_assert!(par.trace.peak_port_use <= 1 && ser.trace.peak_port_use <= 1);
            // Lanes never overlap within themselves.
            for lane in [Lane::Set1, Lane::Set2] {
                let mut spans: Vec<(u64, u64)> = par.trace.rows.iter().filter(|r| r.lane == lane).map(|r| (r.issue, r.retire)).collect();
                spans.sort();
                prop_assert!(spans.windows(2).all(|w| w[0].1 <= w[1].0));
            }
            paired.set(paired.get() + prog.pairs());
            cases.set(cases.get() + 1);
            Ok(())
        })
        .unwrap();
    let (paired, cases) = (paired.get(), cases.get());
    assert!(cases >= 1000);
    assert!(paired > cases, "generator produced too few pairs: {paired}");
    assert!(started.elapsed() < Duration::from_secs(60), "took {:?}", started.elapsed());
}
