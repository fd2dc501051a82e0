//! A small Type II and robustness sweep driven by a JSON config, the same
//! document the `gofmark` binary reads with `--config`.
//!
//! ```bash
//! cargo run --release --example sweep_from_config
//! ```

use gofmark::harness::{ExperimentConfig, Runner, RESULTS_HEADER};

const CONFIG: &str = r#"{
    "schemes": ["gumbel", "inverse"],
    "detectors": ["Phi", "Kui", "Ars"],
    "temperatures": [0.7],
    "lengths": [100, 200],
    "trials": 100,
    "edits": ["Del@0.2", "Info@0.3"],
    "calibration_b": 2000,
    "master_seed": 42
}"#;

fn main() -> gofmark::Result<()> {
    let mut config = ExperimentConfig::from_json(CONFIG)?;
    config.out_dir = std::env::temp_dir().join("gofmark-example-sweep");
    let mut runner = Runner::new(config)?;
    runner.verbose = true;
    let rows = runner.run_robustness()?;
    println!("{RESULTS_HEADER}");
    for r in &rows {
        println!("{}", r.to_csv_line());
    }
    Ok(())
}
