// Runs one named experiment on the coarse configuration and prints its
// summary. Usage: cargo run --release --example experiment -- case2 [samples]

use qclab::gates::GateSet;
use qclab::harness::{run_experiment, HarnessConfig, EXPERIMENTS};

fn main() -> qclab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "case2".into());
    let samples = args.next().map_or(50, |s| s.parse().expect("a sample count"));
    if !EXPERIMENTS.contains(&name.as_str()) {
        eprintln!("unknown experiment `{name}`; one of {}", EXPERIMENTS.join(", "));
        std::process::exit(2);
    }
    let cfg = HarnessConfig::coarse(GateSet::standard()).with_samples(samples);
    let report = run_experiment(&name, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    for r in report.records.iter().filter(|r| r.witness.is_some()).take(3) {
        println!(
            "{} ({}):\n{}",
            r.label,
            r.verdict.as_str(),
            r.witness.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
