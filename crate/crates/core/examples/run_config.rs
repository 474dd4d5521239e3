//! Runs an experiment file and prints the summaries.
//!
//! ```text
//! cargo run --release --example run_config -- configs/acceptance/c13_determinism.toml
//! ```

use anderson_spectra::experiments::{default_output_root, run, ExperimentConfig};

fn main() -> anderson_spectra::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/acceptance/c13_determinism.toml".into());
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let record = run(&cfg, &default_output_root())?;
    for s in &record.summaries {
        println!("{:<18} n={:<7} sup={:?} p={:?}", s.statistic, s.n, s.sup_distance, s.p_value);
    }
    println!("{} files in {} ({:.1} s)", record.files.len(), record.output_dir.display(), record.wall_clock_seconds);
    Ok(())
}
