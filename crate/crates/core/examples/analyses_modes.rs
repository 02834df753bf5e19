//! Running every bundled analysis over a corpus file in all three modes.
//!
//! Usage: cargo run --example analyses_modes [path/to/file.vsrc]

use std::path::PathBuf;

use varlift::analyses::{self, Mode, Prepared};
use varlift::bench::CorpusFile;
use varlift::spl::preprocess;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/config_parser.vsrc"));
    let file = CorpusFile::load(&path)?;
    let stream = preprocess(&file.source, &file.model)?;
    println!("{}: {} effective combinations", file.name, stream.effective_combinations().len());

    for def in analyses::ALL {
        let prepared = Prepared::new(def)?;
        println!("{} ({})", def.name, def.description);
        let mut reports = Vec::new();
        for mode in Mode::ALL {
            let r = prepared.run(&stream, mode)?;
            println!("  {:<8} calls={:<6} sat={:<4}", mode.name(), r.underlying_calls, r.sat_checks);
            reports.push(r);
        }
        assert!(analyses::disagreement(&reports).is_none());
        for (d, pc) in reports[0].result.canonical_pairs().iter().map(|p| (&p.0, &p.1)) {
            println!("    {} when {pc}", def.render(d));
        }
    }
    Ok(())
}
