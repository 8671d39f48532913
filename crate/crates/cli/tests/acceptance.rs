//! Runs every reproduction criterion and prints one PASS/FAIL line each.

use std::process::ExitCode;

use wssl::error::CliResult;
use wssl::repro::{self, Outcome};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> CliResult<Outcome> + 'a>);

fn main() -> ExitCode {
    let workdir = tempfile::tempdir().expect("temporary work directory");
    let dir = workdir.path();
    let seed = 1;
    let runs: Vec<Criterion> = vec![
        ("learning", Box::new(|| repro::learning(dir, seed))),
        ("optimizers", Box::new(|| repro::optimizers(dir, seed))),
        ("runtime", Box::new(|| repro::runtime(dir, seed))),
        ("ik_round_trip", Box::new(|| repro::ik_round_trip(seed))),
        ("annulus", Box::new(|| repro::annulus(dir))),
        ("gradient", Box::new(|| repro::gradient_check(seed))),
        (
            "loss_expectation",
            Box::new(|| repro::loss_expectation(seed)),
        ),
        ("determinism", Box::new(|| repro::determinism(dir, seed))),
    ];
    let mut failed = 0;
    for (n, (name, run)) in runs.iter().enumerate() {
        match run() {
            Ok(outcome) => {
                failed += usize::from(!outcome.passed);
                println!("{outcome}");
            }
            Err(e) => {
                failed += 1;
                println!("criterion {} {name:<16} FAIL  error: {e}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", runs.len() - failed, runs.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
