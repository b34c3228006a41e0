//! Runs the benchmark sweep described by a TOML file (default: the camelback
//! demo next to this example) and prints the summary.
//!
//! ```text
//! cargo run --release --example benchmark_sweep -- examples/camelback.toml
//! ```

use std::path::PathBuf;

use sgek::benchmarks::{run_experiment, ExperimentConfig};

fn main() -> sgek::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/camelback.toml")
        });
    let config = ExperimentConfig::load(&path)?;
    let report = run_experiment(&config)?;
    print!("{}", report.summary_csv());
    print!("{}", report.timing_csv());
    let out = std::env::temp_dir().join("sgek-bench");
    report.write(&out)?;
    println!("report written to {}", out.display());
    Ok(())
}
