//! Problem files, the solve → monodromy → log → reduce → verify pipeline, and
//! report emission.
//!
//! A problem is a JSON document. Complex numbers are `[re, im]`; trig terms
//! are `[harmonic, re, im]`:
//!
//! ```json
//! {
//!   "depth": 2,
//!   "period": 1.0,
//!   "entries": [
//!     { "row": 1, "col": 1, "constant": [1, 0] },
//!     { "row": 2, "col": 2, "constant": [1, 0] },
//!     { "row": 2, "col": 1, "cos": [[1, 1, 0]] }
//!   ],
//!   "solver": { "steps": 2000, "tol": 1e-8 },
//!   "branch": { "windings": [] }
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::floquet::{self, Check};
use crate::linalg::{compatible_log_detailed, LogBranch};
use crate::ode::{self, CoefficientTower, TrigPolynomial};
use crate::{Error, Result};

/// Environment variable consulted for the tolerance when a problem file does
/// not set one.
pub const TOL_ENV: &str = "FLOQUET_TOL";
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_STEPS: usize = 2000;
/// Tolerance for the finite-difference based checks (constancy, connection).
pub const DEFAULT_FD_TOL: f64 = 1e-5;
const COEFFICIENT_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub row: usize,
    pub col: usize,
    #[serde(default)]
    pub constant: [f64; 2],
    #[serde(default)]
    pub cos: Vec<(u32, f64, f64)>,
    #[serde(default)]
    pub sin: Vec<(u32, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub fd_tol: Option<f64>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            tol: None,
            fd_tol: None,
        }
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    #[serde(default)]
    pub windings: Vec<(usize, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub depth: usize,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default)]
    pub entries: Vec<EntrySpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub branch: BranchSpec,
}

fn default_period() -> f64 {
    1.0
}

impl ProblemSpec {
    pub fn tol(&self) -> f64 {
        self.solver.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn fd_tol(&self) -> f64 {
        self.solver.fd_tol.unwrap_or(DEFAULT_FD_TOL)
    }

    /// Checks every structural invariant and names the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Validation("depth must be at least 1".into()));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::Validation(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        if self.solver.steps < ode::MIN_STEPS {
            return Err(Error::Validation(format!(
                "solver.steps must be at least {}, got {}",
                ode::MIN_STEPS,
                self.solver.steps
            )));
        }
        for (name, value) in [
            ("solver.tol", self.solver.tol),
            ("solver.fd_tol", self.solver.fd_tol),
        ] {
            if let Some(v) = value {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        let mut seen = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            if e.row == 0 || e.col == 0 {
                return Err(Error::Validation(format!(
                    "entry ({},{}) uses 0; rows and columns are 1-based",
                    e.row, e.col
                )));
            }
            if e.col > e.row {
                return Err(Error::Validation(format!(
                    "upper-triangular entry ({},{})",
                    e.row, e.col
                )));
            }
            if e.row > self.depth {
                return Err(Error::Validation(format!(
                    "entry ({},{}) exceeds depth {}",
                    e.row, e.col, self.depth
                )));
            }
            if seen.contains(&(e.row, e.col)) {
                return Err(Error::Validation(format!(
                    "duplicate entry ({},{})",
                    e.row, e.col
                )));
            }
            seen.push((e.row, e.col));
            for (name, terms) in [("cos", &e.cos), ("sin", &e.sin)] {
                let mut harmonics = Vec::with_capacity(terms.len());
                for &(k, _, _) in terms {
                    if k == 0 || harmonics.contains(&k) {
                        return Err(Error::Validation(format!(
                            "entry ({},{}) has invalid or repeated {name} harmonic {k}",
                            e.row, e.col
                        )));
                    }
                    harmonics.push(k);
                }
            }
        }
        let mut levels = Vec::with_capacity(self.branch.windings.len());
        for &(level, _) in &self.branch.windings {
            if level == 0 || level > self.depth {
                return Err(Error::Validation(format!(
                    "branch winding references level {level}, depth is {}",
                    self.depth
                )));
            }
            if levels.contains(&level) {
                return Err(Error::Validation(format!(
                    "duplicate branch winding for level {level}"
                )));
            }
            levels.push(level);
        }
        Ok(())
    }

    /// The coefficient tower in the file's own time units.
    pub fn coefficient(&self) -> Result<CoefficientTower> {
        self.validate()?;
        let mut tower = CoefficientTower::new(self.depth, self.period)?;
        let cx = |re: f64, im: f64| Complex64::new(re, im);
        for e in &self.entries {
            let poly = TrigPolynomial::new(
                cx(e.constant[0], e.constant[1]),
                e.cos.iter().map(|&(k, re, im)| (k, cx(re, im))).collect(),
                e.sin.iter().map(|&(k, re, im)| (k, cx(re, im))).collect(),
                self.period,
            )?;
            tower.insert(e.row, e.col, poly)?;
        }
        Ok(tower)
    }

    pub fn branch(&self) -> Result<LogBranch> {
        LogBranch::from_windings(self.branch.windings.clone())
    }
}

fn tol_from_env() -> Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(Some)
            .ok_or_else(|| {
                Error::Validation(format!("{TOL_ENV}={raw:?} is not a positive number"))
            }),
        Err(_) => Ok(None),
    }
}

/// Parses and validates a problem document. A missing `solver.tol` is taken
/// from `FLOQUET_TOL` when set.
pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut spec: ProblemSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!("field `{path}`: {inner}"))
    })?;
    if spec.solver.tol.is_none() {
        spec.solver.tol = tol_from_env()?;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(spec: &ProblemSpec) -> String {
    serde_json::to_string_pretty(spec).expect("problem specs always serialize")
}

/// How far [`run_stage`] goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Solve,
    Monodromy,
    Logtower,
    Floquet,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Solve => "solve",
            Stage::Monodromy => "monodromy",
            Stage::Logtower => "logtower",
            Stage::Floquet => "floquet",
            Stage::Verify => "verify",
        };
        f.write_str(s)
    }
}

pub type ComplexPair = [f64; 2];

fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn matrix_rows(m: &Array2<Complex64>) -> Vec<Vec<ComplexPair>> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().copied().map(pair).collect())
        .collect()
}

/// Lower-triangular entries in row-major order: (1,1), (2,1), (2,2), (3,1), ...
fn lower_entries(m: &Array2<Complex64>) -> Vec<ComplexPair> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for r in 0..n {
        for c in 0..=r {
            out.push(pair(m[[r, c]]));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn new(name: &str, check: Check) -> Self {
        Self {
            name: name.to_string(),
            residual: check.residual,
            tol: check.tol,
            pass: check.pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorInfo {
    pub steps: usize,
    pub order: u32,
    pub error_estimate: f64,
}

/// Grid series of the top-level `Φ` and `Q`, lower-triangular entries only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub times: Vec<f64>,
    pub phi: Vec<Vec<ComplexPair>>,
    #[serde(default)]
    pub q: Option<Vec<Vec<ComplexPair>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: ProblemSpec,
    pub stage: Stage,
    /// `"pass"` iff every check passed.
    pub status: String,
    /// Matrices below are reported for the tower truncated to this level.
    pub level: usize,
    /// Whether time was rescaled so that the period is 1.
    pub period_normalized: bool,
    pub integrator: IntegratorInfo,
    #[serde(default)]
    pub monodromy: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default)]
    pub eigenvalues: Option<Vec<ComplexPair>>,
    #[serde(default)]
    pub logs: Option<Vec<ComplexPair>>,
    #[serde(default)]
    pub min_gamma_modulus: Option<f64>,
    #[serde(default)]
    pub bbar: Option<Vec<Vec<ComplexPair>>>,
    pub checks: Vec<CheckRecord>,
    pub series: Series,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Restricts every reported matrix and series to the tower of depth `level`.
    pub fn restrict_to_level(&mut self, level: usize) -> Result<()> {
        if level == 0 || level > self.level {
            return Err(Error::Validation(format!(
                "level {level} out of range 1..={}",
                self.level
            )));
        }
        let cut_matrix = |m: &mut Vec<Vec<ComplexPair>>| {
            m.truncate(level);
            for row in m.iter_mut() {
                row.truncate(level);
            }
        };
        let keep = level * (level + 1) / 2;
        if let Some(m) = self.monodromy.as_mut() {
            cut_matrix(m);
        }
        if let Some(m) = self.bbar.as_mut() {
            cut_matrix(m);
        }
        for v in [self.eigenvalues.as_mut(), self.logs.as_mut()]
            .into_iter()
            .flatten()
        {
            v.truncate(level);
        }
        for row in self.series.phi.iter_mut() {
            row.truncate(keep);
        }
        if let Some(q) = self.series.q.as_mut() {
            for row in q.iter_mut() {
                row.truncate(keep);
            }
        }
        self.level = level;
        Ok(())
    }
}

fn timed<T>(
    timings: &mut BTreeMap<String, f64>,
    name: &str,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

/// Runs the full pipeline including every verification check.
pub fn run_pipeline(spec: &ProblemSpec) -> Result<Report> {
    run_stage(spec, Stage::Verify)
}

/// Runs the pipeline up to and including `stage`.
///
/// Time is rescaled so that the period is 1 before integrating; monodromy,
/// logarithms and `B̄` are reported in those units.
pub fn run_stage(spec: &ProblemSpec, stage: Stage) -> Result<Report> {
    spec.validate()?;
    let tol = spec.tol();
    let fd_tol = spec.fd_tol();
    let steps = spec.solver.steps;
    let branch = spec.branch()?;
    let raw = spec.coefficient()?;
    let a = raw.normalized();
    let depth = spec.depth;

    let mut timings = BTreeMap::new();
    let mut checks = Vec::new();

    let periodicity = ode::check_coefficient_periodicity(&raw, COEFFICIENT_SAMPLES, tol);
    checks.push(CheckRecord::new(
        "coefficient-periodicity",
        Check::new(periodicity.residual, tol),
    ));

    let sol = timed(&mut timings, "solve", || {
        ode::solve_fundamental(&a, steps, tol)
    })?;
    let mut report = Report {
        spec: spec.clone(),
        stage,
        status: String::new(),
        level: depth,
        period_normalized: true,
        integrator: IntegratorInfo {
            steps: sol.steps(),
            order: sol.order(),
            error_estimate: sol.error_estimate(),
        },
        monodromy: None,
        eigenvalues: None,
        logs: None,
        min_gamma_modulus: None,
        bbar: None,
        checks: Vec::new(),
        series: Series {
            times: sol.times().to_vec(),
            phi: sol
                .top_samples()
                .iter()
                .map(|m| lower_entries(m.top()))
                .collect(),
            q: None,
        },
        timings_ms: BTreeMap::new(),
    };

    if stage >= Stage::Monodromy {
        let mono = floquet::monodromy(&sol)?;
        report.monodromy = Some(matrix_rows(mono.m.top()));
        report.eigenvalues = Some(mono.m.diagonal().into_iter().map(pair).collect());
        checks.push(CheckRecord::new(
            "monodromy-homomorphism",
            floquet::check_monodromy_homomorphism(&mono, 3, tol)?,
        ));

        if stage >= Stage::Logtower {
            let log = timed(&mut timings, "logtower", || {
                compatible_log_detailed(&mono.m, &branch, tol)
            })?;
            report.logs = Some(log.logs.iter().copied().map(pair).collect());
            report.bbar = Some(matrix_rows(log.tower.top()));
            report.min_gamma_modulus = Some(log.min_gamma_modulus());
            checks.push(CheckRecord::new("exp-log", Check::new(log.residual(), tol)));
        }
    }

    if stage >= Stage::Floquet {
        let result = timed(&mut timings, "floquet", || {
            floquet::floquet_reduce(&sol, &branch, tol)
        })?;
        report.series.q = Some(
            result
                .q_samples
                .iter()
                .map(|m| lower_entries(m.top()))
                .collect(),
        );
        let r = result.residuals;
        checks.push(CheckRecord::new(
            "periodicity",
            Check::new(r.periodicity, tol),
        ));
        checks.push(CheckRecord::new(
            "constancy",
            Check::new(r.constancy, fd_tol),
        ));
        checks.push(CheckRecord::new("extension", Check::new(r.extension, tol)));
        checks.push(CheckRecord::new(
            "connection",
            Check::new(r.connection, fd_tol),
        ));
    }

    if stage >= Stage::Verify {
        let levelwise = timed(&mut timings, "verify-levelwise", || {
            ode::solve_fundamental_levelwise(&a, steps, tol)
        })?;
        let consistency = ode::check_projective_consistency(&levelwise, tol);
        checks.push(CheckRecord::new(
            "projective-consistency",
            Check::new(consistency.residual, tol),
        ));
        let agreement = sol
            .top_samples()
            .iter()
            .zip(levelwise.top_samples())
            .map(|(x, y)| crate::tower::max_entry_diff(x.top(), y.top()))
            .fold(0.0, f64::max);
        checks.push(CheckRecord::new(
            "levelwise-agreement",
            Check::new(agreement, tol),
        ));
    }

    report.status = if checks.iter().all(|c| c.pass) {
        "pass"
    } else {
        "fail"
    }
    .to_string();
    report.checks = checks;
    report.timings_ms = timings;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Usage(format!(
                "unknown format {other:?}, expected json or csv"
            ))),
        }
    }
}

pub fn report_to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("reports always serialize")
}

pub fn report_from_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// CSV header: `t`, then re/im columns for every lower-triangular entry of
/// `Φ`, then the same for `Q` when present.
pub fn csv_header(report: &Report) -> Vec<String> {
    let n = report.level;
    let mut cols = vec!["t".to_string()];
    let mut series = vec!["phi"];
    if report.series.q.is_some() {
        series.push("q");
    }
    for name in series {
        for r in 1..=n {
            for c in 1..=r {
                cols.push(format!("{name}_{r}_{c}_re"));
                cols.push(format!("{name}_{r}_{c}_im"));
            }
        }
    }
    cols
}

pub fn write_csv(report: &Report, mut w: impl Write) -> Result<()> {
    writeln!(w, "{}", csv_header(report).join(","))?;
    for (s, t) in report.series.times.iter().enumerate() {
        let mut fields = vec![format!("{t:e}")];
        let mut push = |row: &[ComplexPair]| {
            for z in row {
                fields.push(format!("{:e}", z[0]));
                fields.push(format!("{:e}", z[1]));
            }
        };
        push(&report.series.phi[s]);
        if let Some(q) = &report.series.q {
            push(&q[s]);
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn emit(report: &Report, format: Format, out: impl AsRef<Path>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(out)?);
    match format {
        Format::Json => {
            file.write_all(report_to_json(report).as_bytes())?;
            file.write_all(b"\n")?;
        }
        Format::Csv => write_csv(report, &mut file)?,
    }
    file.flush()?;
    Ok(())
}
