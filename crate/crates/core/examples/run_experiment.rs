// Running a configured experiment and writing its CSV table and JSON
// sidecar, the same path the `ncflow` binary takes.
//
// `cargo run --release --example run_experiment -- [out_dir]`

use std::path::{Path, PathBuf};

use ncflow::experiment::{run, ExperimentConfig};

pub fn run_example() -> ncflow::Result<()> {
    run_into(&std::env::temp_dir().join(format!("ncflow-example-{}", std::process::id())))
}

fn run_into(out: &Path) -> ncflow::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{
            "schema_version": 1,
            "experiment": "matrix-flow",
            "seed": 42,
            "n_max": 20000,
            "params": { "dim": 6 }
        }"#,
    )?;
    let output = run(&config, out, 2)?;
    for path in output.csv.iter().chain([&output.sidecar]) {
        println!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&output.outcome.summary)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> ncflow::Result<()> {
    match std::env::args_os().nth(1) {
        Some(dir) => run_into(&PathBuf::from(dir)),
        None => run_example(),
    }
}
