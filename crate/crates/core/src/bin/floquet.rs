use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_frechet::problem::{self, Format, Report, Stage};
use floquet_frechet::Error;

#[derive(Parser)]
#[command(
    name = "floquet",
    version,
    about = "Floquet-Liapunov reduction on the C^∞ tower"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the fundamental solution over one period.
    Solve(Shared),
    /// Integrate and report the monodromy tower Φ(1).
    Monodromy(Shared),
    /// Monodromy plus its projective-compatible logarithm.
    Logtower(Shared),
    /// Full reduction to a constant coefficient.
    Floquet(Shared),
    /// Full pipeline and every verification check.
    Verify(Shared),
}

#[derive(Args)]
struct Shared {
    /// Problem file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Override the number of integration steps per period.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the tolerance (default: file, then $FLOQUET_TOL, then 1e-8).
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
    /// Restrict reported matrices to this level of the tower.
    #[arg(long)]
    level: Option<usize>,
}

fn run(stage: Stage, args: &Shared) -> Result<Report, Error> {
    let format: Format = args.format.parse()?;
    let mut spec = problem::load_problem(&args.spec)?;
    if let Some(steps) = args.steps {
        spec.solver.steps = steps;
    }
    if let Some(tol) = args.tol {
        spec.solver.tol = Some(tol);
    }
    spec.validate()?;
    let mut report = problem::run_stage(&spec, stage)?;
    if let Some(level) = args.level {
        report.restrict_to_level(level)?;
    }
    match &args.out {
        Some(out) => problem::emit(&report, format, out)?,
        None => match format {
            Format::Json => println!("{}", problem::report_to_json(&report)),
            Format::Csv => problem::write_csv(&report, std::io::stdout().lock())?,
        },
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = match &cli.command {
        Command::Solve(a) => (Stage::Solve, a),
        Command::Monodromy(a) => (Stage::Monodromy, a),
        Command::Logtower(a) => (Stage::Logtower, a),
        Command::Floquet(a) => (Stage::Floquet, a),
        Command::Verify(a) => (Stage::Verify, a),
    };
    match run(stage, args) {
        Ok(report) => {
            for check in &report.checks {
                eprintln!(
                    "{:<24} {:>12.3e}  tol {:>8.1e}  {}",
                    check.name,
                    check.residual,
                    check.tol,
                    if check.pass { "pass" } else { "FAIL" }
                );
            }
            eprintln!("status: {}", report.status);
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            let record = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
