//! The file-level workflow: simulate a sample to CSV, fit it, and read the
//! written component curves back.
//!
//! cargo run --example fit_csv [output-dir]

use std::path::PathBuf;

use spbk::report::{cmd_fit, cmd_simulate, read_numeric_csv, RunConfig};

fn main() -> spbk::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("spbk-fit-csv"));

    let sim = RunConfig {
        n: Some(400),
        seed: Some(1),
        output_dir: Some(dir.clone()),
        ..RunConfig::default()
    };
    for f in cmd_simulate(&sim)? {
        println!("wrote {}", f.display());
    }

    let fit = RunConfig {
        input: Some(dir.join("sample.csv")),
        output_dir: Some(dir.join("fit")),
        range: Some("-2.58,2.58".into()),
        ..RunConfig::default()
    };
    let report = cmd_fit(&fit)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report.summary).expect("summary serializes")
    );

    let curve = read_numeric_csv(&dir.join("fit").join("spbk_m2.csv"))?;
    let interior = curve.rows.iter().filter(|r| r[4] == 1.0).count();
    println!(
        "spbk_m2.csv: {} grid points, {interior} with bands",
        curve.rows.len()
    );
    Ok(())
}
