//! Runs the whole pipeline on a problem file and writes JSON and CSV reports.
//!
//! cargo run --example pipeline_from_file -- problems/two_level.json [out_dir]

use floquet_frechet::problem::{emit, load_problem, run_pipeline, Format};
use std::path::PathBuf;

fn main() -> floquet_frechet::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec_path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems/two_level.json")
    });
    let out_dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);

    let spec = load_problem(&spec_path)?;
    let report = run_pipeline(&spec)?;
    for check in &report.checks {
        println!(
            "{:<24} {:.3e} (tol {:.0e}) {}",
            check.name,
            check.residual,
            check.tol,
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    let json = out_dir.join("report.json");
    let csv = out_dir.join("report.csv");
    emit(&report, Format::Json, &json)?;
    emit(&report, Format::Csv, &csv)?;
    println!(
        "status {}; wrote {} and {}",
        report.status,
        json.display(),
        csv.display()
    );
    Ok(())
}
