//! Counter scaling on synthetic files with 2^n effective combinations.
//!
//! Usage: cargo run --release --example benchmark [max_blocks]

use varlift::analyses::{Mode, CASE_TERMINATION, CALL_DENSITY};
use varlift::bench::{group_and_summarize, run_benchmark, synthetic, BenchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(6);
    let files = (1..=max).map(synthetic).collect::<Result<Vec<_>, _>>()?;
    let config = BenchConfig {
        analyses: vec![CASE_TERMINATION, CALL_DENSITY],
        modes: vec![Mode::Brute, Mode::Deep],
        reps: 3,
    };
    let outcome = run_benchmark(&files, &config)?;
    assert!(outcome.is_ok());
    print!("{}", group_and_summarize(&outcome.records, true));

    println!("\ndeep/brute underlying calls:");
    for pair in outcome.records.chunks(2) {
        let (brute, deep) = (&pair[0], &pair[1]);
        println!(
            "  {:>4} combos {:<16} {:.3}",
            brute.combos,
            brute.analysis,
            deep.underlying_calls as f64 / brute.underlying_calls as f64
        );
    }
    Ok(())
}
