//! Periodic coefficient towers and their fundamental solutions.
//!
//! A coefficient `A = ε ∘ A*` on the `C^∞` tower is a lower-triangular matrix
//! of trig polynomials. Integrating the top level `Φ_N' = A_N(t) Φ_N` and
//! truncating gives every `Φ_n`; [`solve_fundamental_levelwise`] integrates
//! each level on its own so that `ρ_{j,i} ∘ Φ_j = Φ_i` can be checked instead
//! of assumed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::linalg::{lower_mul, lower_power};
use crate::tower::{max_entry_diff, NestedMatrix};
use crate::{Error, Result, SINGULAR_THRESHOLD};

pub const RK4_ORDER: u32 = 4;
pub const MIN_STEPS: usize = 8;

/// `c + Σ a_k cos(2πkt/T) + Σ b_k sin(2πkt/T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    constant: Complex64,
    cos: Vec<(u32, Complex64)>,
    sin: Vec<(u32, Complex64)>,
    period: f64,
}

impl TrigPolynomial {
    pub fn new(
        constant: Complex64,
        cos: Vec<(u32, Complex64)>,
        sin: Vec<(u32, Complex64)>,
        period: f64,
    ) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Validation(format!(
                "period must be positive, got {period}"
            )));
        }
        for (name, terms) in [("cos", &cos), ("sin", &sin)] {
            let mut seen = Vec::with_capacity(terms.len());
            for &(k, _) in terms {
                if k == 0 {
                    return Err(Error::Validation(format!(
                        "{name} harmonic must be positive"
                    )));
                }
                if seen.contains(&k) {
                    return Err(Error::Validation(format!("duplicate {name} harmonic {k}")));
                }
                seen.push(k);
            }
        }
        Ok(Self {
            constant,
            cos,
            sin,
            period,
        })
    }

    pub fn constant(value: Complex64, period: f64) -> Result<Self> {
        Self::new(value, Vec::new(), Vec::new(), period)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn constant_term(&self) -> Complex64 {
        self.constant
    }

    pub fn cos_terms(&self) -> &[(u32, Complex64)] {
        &self.cos
    }

    pub fn sin_terms(&self) -> &[(u32, Complex64)] {
        &self.sin
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let phase = 2.0 * PI * t.rem_euclid(self.period) / self.period;
        let mut v = self.constant;
        for &(k, a) in &self.cos {
            v += a * (k as f64 * phase).cos();
        }
        for &(k, b) in &self.sin {
            v += b * (k as f64 * phase).sin();
        }
        v
    }

    /// `s -> factor · p(period · s)`, a polynomial of period 1.
    fn rescaled_to_unit_period(&self, factor: f64) -> Self {
        let scale = |terms: &[(u32, Complex64)]| {
            terms
                .iter()
                .map(|&(k, a)| (k, a * factor))
                .collect::<Vec<_>>()
        };
        Self {
            constant: self.constant * factor,
            cos: scale(&self.cos),
            sin: scale(&self.sin),
            period: 1.0,
        }
    }
}

/// A periodic coefficient `A*(t)` valued in nested matrices. Only entries with
/// `col <= row` can be set (1-based), so every evaluation is a projective map.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTower {
    depth: usize,
    period: f64,
    entries: BTreeMap<(usize, usize), TrigPolynomial>,
}

impl CoefficientTower {
    pub fn new(depth: usize, period: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Validation("depth must be at least 1".into()));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Validation(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self {
            depth,
            period,
            entries: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, row: usize, col: usize, poly: TrigPolynomial) -> Result<()> {
        if row == 0 || col == 0 || row > self.depth || col > self.depth {
            return Err(Error::Validation(format!(
                "entry ({row},{col}) lies outside a depth-{} tower",
                self.depth
            )));
        }
        if col > row {
            return Err(Error::Validation(format!(
                "upper-triangular entry ({row},{col})"
            )));
        }
        if self.entries.contains_key(&(row, col)) {
            return Err(Error::Validation(format!("duplicate entry ({row},{col})")));
        }
        if let Some(other) = self.entries.values().next() {
            if (other.period - poly.period).abs() > 1e-12 * other.period {
                return Err(Error::Validation(format!(
                    "entry ({row},{col}) has period {} but other entries have period {}",
                    poly.period, other.period
                )));
            }
        }
        self.entries.insert((row, col), poly);
        Ok(())
    }

    pub fn with_entry(mut self, row: usize, col: usize, poly: TrigPolynomial) -> Result<Self> {
        self.insert(row, col, poly)?;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &TrigPolynomial)> {
        self.entries.iter()
    }

    /// `A_N(t)` as a dense matrix, exactly lower triangular.
    pub fn eval_top(&self, t: f64) -> Array2<Complex64> {
        let mut a = Array2::zeros((self.depth, self.depth));
        for (&(r, c), p) in &self.entries {
            a[[r - 1, c - 1]] = p.eval(t);
        }
        a
    }

    /// `A_n(t)`, the leading `n x n` block.
    pub fn eval_level(&self, level: usize, t: f64) -> Array2<Complex64> {
        let mut a = Array2::zeros((level, level));
        for (&(r, c), p) in self.entries.range(..(level + 1, 0)) {
            a[[r - 1, c - 1]] = p.eval(t);
        }
        a
    }

    /// The coefficient tower evaluated at `t`.
    pub fn eval(&self, t: f64) -> NestedMatrix {
        NestedMatrix::from_lower_unchecked(self.eval_top(t))
    }

    /// Rescales time so the period becomes 1: `Ã(s) = T·A(T s)`.
    pub fn normalized(&self) -> Self {
        let t = self.period;
        Self {
            depth: self.depth,
            period: 1.0,
            entries: self
                .entries
                .iter()
                .map(|(&k, p)| (k, p.rescaled_to_unit_period(t)))
                .collect(),
        }
    }
}

/// `eval_coefficient` as a free function.
pub fn eval_coefficient(a: &CoefficientTower, t: f64) -> NestedMatrix {
    a.eval(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPeriodicity {
    /// `max_t |A_N(t + T) - A_N(t)|`, the tower residual.
    pub residual: f64,
    /// The same quantity restricted to each level `1..=N`.
    pub level_residuals: Vec<f64>,
    pub tower_periodic: bool,
    pub levelwise_periodic: bool,
    pub pass: bool,
}

/// Samples `t_k = k T / samples` and compares `A(t_k + T)` with `A(t_k)`.
///
/// The tower is periodic exactly when every level is, so both verdicts are
/// reported and always coincide.
pub fn check_coefficient_periodicity(
    a: &CoefficientTower,
    samples: usize,
    tol: f64,
) -> CoefficientPeriodicity {
    let n = a.depth();
    let samples = samples.max(1);
    let mut level_residuals = vec![0.0_f64; n];
    for k in 0..samples {
        let t = a.period() * k as f64 / samples as f64;
        let lhs = a.eval_top(t + a.period());
        let rhs = a.eval_top(t);
        for r in 0..n {
            for c in 0..=r {
                let d = (lhs[[r, c]] - rhs[[r, c]]).norm();
                for lr in level_residuals.iter_mut().skip(r) {
                    *lr = lr.max(d);
                }
            }
        }
    }
    let residual = level_residuals.last().copied().unwrap_or(0.0);
    let levelwise_periodic = level_residuals.iter().all(|&r| r <= tol);
    let tower_periodic = residual <= tol;
    CoefficientPeriodicity {
        residual,
        level_residuals,
        tower_periodic,
        levelwise_periodic,
        pass: tower_periodic && levelwise_periodic,
    }
}

/// Sampled fundamental solutions `Φ_n(t_s)` on the uniform grid
/// `t_s = s T / S`, `s = 0..=S`.
#[derive(Clone, Debug)]
pub struct SolutionTower {
    coefficient: CoefficientTower,
    times: Vec<f64>,
    top: Vec<NestedMatrix>,
    levels: Option<Vec<Vec<Array2<Complex64>>>>,
    order: u32,
    error_estimate: f64,
}

impl SolutionTower {
    /// Assembles a solution from raw samples.
    ///
    /// `top` holds the level-`N` samples; `levels`, when present, holds
    /// independently obtained samples for every level `1..=N`.
    pub fn from_parts(
        coefficient: CoefficientTower,
        times: Vec<f64>,
        top: Vec<NestedMatrix>,
        levels: Option<Vec<Vec<Array2<Complex64>>>>,
        order: u32,
        error_estimate: f64,
    ) -> Result<Self> {
        let depth = coefficient.depth();
        if times.len() < 2 || times.len() != top.len() {
            return Err(Error::Shape(format!(
                "{} time samples for {} matrix samples",
                times.len(),
                top.len()
            )));
        }
        if top.iter().any(|m| m.depth() != depth) {
            return Err(Error::Shape(
                "sample depth differs from the coefficient".into(),
            ));
        }
        if let Some(levels) = &levels {
            if levels.len() != depth {
                return Err(Error::Shape(format!(
                    "{} independent levels for a depth-{depth} tower",
                    levels.len()
                )));
            }
            for (i, series) in levels.iter().enumerate() {
                if series.len() != times.len() || series.iter().any(|m| m.dim() != (i + 1, i + 1)) {
                    return Err(Error::Shape(format!(
                        "level {} samples are malformed",
                        i + 1
                    )));
                }
            }
        }
        Ok(Self {
            coefficient,
            times,
            top,
            levels,
            order,
            error_estimate,
        })
    }

    pub fn coefficient(&self) -> &CoefficientTower {
        &self.coefficient
    }

    pub fn depth(&self) -> usize {
        self.coefficient.depth()
    }

    pub fn period(&self) -> f64 {
        self.coefficient.period()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn step_size(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Richardson estimate of the global error of the returned samples.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn is_levelwise(&self) -> bool {
        self.levels.is_some()
    }

    pub fn top_samples(&self) -> &[NestedMatrix] {
        &self.top
    }

    /// `Φ_n(t_s)`.
    pub fn sample(&self, level: usize, s: usize) -> Result<Array2<Complex64>> {
        if s >= self.times.len() {
            return Err(Error::Range(format!("sample index {s} beyond the grid")));
        }
        match &self.levels {
            Some(levels) => levels
                .get(level.wrapping_sub(1))
                .map(|series| series[s].clone())
                .ok_or_else(|| Error::Range(format!("level {level} out of range"))),
            None => self.top[s].level(level),
        }
    }

    /// `Φ_N(t_s + m) = Φ_N(t_s) Φ_N(T)^m`, the cocycle extension past one period.
    pub fn sample_shifted(&self, s: usize, periods: i64) -> Result<Array2<Complex64>> {
        let phi = self
            .top
            .get(s)
            .ok_or_else(|| Error::Range(format!("sample index {s} beyond the grid")))?;
        let m = self.top.last().expect("non-empty grid");
        Ok(lower_mul(phi.top(), &lower_power(m.top(), periods)?))
    }
}

fn rk4_step(
    a: &impl Fn(f64) -> Array2<Complex64>,
    phi: &Array2<Complex64>,
    t: f64,
    h: f64,
) -> Array2<Complex64> {
    let a0 = a(t);
    let a_half = a(t + 0.5 * h);
    let a1 = a(t + h);
    let k1 = lower_mul(&a0, phi);
    let k2 = lower_mul(&a_half, &(phi + &k1.mapv(|z| z * (0.5 * h))));
    let k3 = lower_mul(&a_half, &(phi + &k2.mapv(|z| z * (0.5 * h))));
    let k4 = lower_mul(&a1, &(phi + &k3.mapv(|z| z * h)));
    let incr = (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
    phi + &incr
}

fn integrate(
    a: impl Fn(f64) -> Array2<Complex64>,
    dim: usize,
    period: f64,
    steps: usize,
) -> Result<Vec<Array2<Complex64>>> {
    let h = period / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut phi: Array2<Complex64> = Array2::eye(dim);
    out.push(phi.clone());
    for k in 0..steps {
        phi = rk4_step(&a, &phi, k as f64 * h, h);
        if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric(format!(
                "fundamental solution became non-finite at step {}",
                k + 1
            )));
        }
        out.push(phi.clone());
    }
    Ok(out)
}

/// Top-level fundamental solution samples by classical RK4 with `steps`
/// uniform steps over one period, without any error estimation.
pub fn integrate_fundamental(a: &CoefficientTower, steps: usize) -> Result<Vec<Array2<Complex64>>> {
    if steps == 0 {
        return Err(Error::Range("at least one step is required".into()));
    }
    integrate(|t| a.eval_top(t), a.depth(), a.period(), steps)
}

fn richardson_estimate(
    a: &CoefficientTower,
    coarse: &[Array2<Complex64>],
    steps: usize,
) -> Result<f64> {
    let fine = integrate_fundamental(a, 2 * steps)?;
    let diff = coarse
        .iter()
        .enumerate()
        .map(|(s, m)| max_entry_diff(m, &fine[2 * s]))
        .fold(0.0, f64::max);
    let gain = 2f64.powi(RK4_ORDER as i32);
    Ok(diff * gain / (gain - 1.0))
}

fn check_solution_inputs(steps: usize, tol: f64) -> Result<()> {
    if steps < MIN_STEPS {
        return Err(Error::Range(format!(
            "steps must be at least {MIN_STEPS}, got {steps}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Range(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn check_invertible(samples: &[Array2<Complex64>]) -> Result<()> {
    for (s, m) in samples.iter().enumerate() {
        if let Some(k) = (0..m.nrows()).find(|&k| !(m[[k, k]].norm() > SINGULAR_THRESHOLD)) {
            return Err(Error::Conditioning(format!(
                "fundamental solution is numerically singular at sample {s} (diagonal {})",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Fundamental solution of `Φ' = A(t) Φ`, `Φ(0) = I`, over one period.
///
/// Only the top level is integrated; lower levels are its truncations. The
/// global error is estimated by rerunning with half the step, and an estimate
/// above `tol` is an accuracy error.
pub fn solve_fundamental(a: &CoefficientTower, steps: usize, tol: f64) -> Result<SolutionTower> {
    check_solution_inputs(steps, tol)?;
    let samples = integrate_fundamental(a, steps)?;
    let estimate = richardson_estimate(a, &samples, steps)?;
    if !(estimate <= tol) {
        return Err(Error::Accuracy(format!(
            "estimated global error {estimate:.3e} exceeds {tol:e} with {steps} steps; increase steps"
        )));
    }
    check_invertible(&samples)?;
    let times = grid(a.period(), steps);
    let top = samples
        .into_iter()
        .map(NestedMatrix::from_lower_unchecked)
        .collect();
    SolutionTower::from_parts(a.clone(), times, top, None, RK4_ORDER, estimate)
}

/// Verification mode: every level `n` integrates `Φ_n' = A_n(t) Φ_n` on its
/// own, concurrently. Consistency between the levels is then a checkable
/// property rather than a consequence of truncation.
pub fn solve_fundamental_levelwise(
    a: &CoefficientTower,
    steps: usize,
    tol: f64,
) -> Result<SolutionTower> {
    check_solution_inputs(steps, tol)?;
    let depth = a.depth();
    let results: Vec<Result<Vec<Array2<Complex64>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=depth)
            .map(|level| {
                scope.spawn(move || integrate(|t| a.eval_level(level, t), level, a.period(), steps))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("level integration panicked"))
            .collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    let top_samples = levels.last().expect("depth >= 1").clone();
    let estimate = richardson_estimate(a, &top_samples, steps)?;
    if !(estimate <= tol) {
        return Err(Error::Accuracy(format!(
            "estimated global error {estimate:.3e} exceeds {tol:e} with {steps} steps; increase steps"
        )));
    }
    for series in &levels {
        check_invertible(series)?;
    }
    let times = grid(a.period(), steps);
    let top = top_samples
        .into_iter()
        .map(NestedMatrix::from_lower_unchecked)
        .collect();
    SolutionTower::from_parts(a.clone(), times, top, Some(levels), RK4_ORDER, estimate)
}

fn grid(period: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|s| period * s as f64 / steps as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `max_{s, n} |ρ_{n+1,n}(Φ_{n+1}(t_s)) - Φ_n(t_s)|`.
pub fn check_projective_consistency(sol: &SolutionTower, tol: f64) -> ConsistencyReport {
    let mut residual = 0.0_f64;
    if let Some(levels) = &sol.levels {
        for pair in levels.windows(2) {
            let (lower, upper) = (&pair[0], &pair[1]);
            let n = lower[0].nrows();
            for (lo, up) in lower.iter().zip(upper) {
                let truncated = up.slice(s![..n, ..n]).to_owned();
                residual = residual.max(max_entry_diff(&truncated, lo));
            }
        }
    }
    ConsistencyReport {
        residual,
        tol,
        pass: residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(constant: f64, sin: f64) -> CoefficientTower {
        let p = TrigPolynomial::new(c(constant), vec![], vec![(1, c(sin))], 1.0).unwrap();
        CoefficientTower::new(1, 1.0)
            .unwrap()
            .with_entry(1, 1, p)
            .unwrap()
    }

    #[test]
    fn eval_examples() {
        let zero = CoefficientTower::new(3, 1.0).unwrap();
        assert_eq!(zero.eval(0.3), NestedMatrix::zeros(3));

        let a = scalar(1.0, 1.0);
        assert_abs_diff_eq!(a.eval(0.25).top()[[0, 0]].re, 2.0, epsilon = 1e-15);

        let p = TrigPolynomial::new(c(0.0), vec![(1, c(1.0))], vec![], 1.0).unwrap();
        let a = CoefficientTower::new(2, 1.0)
            .unwrap()
            .with_entry(2, 1, p)
            .unwrap();
        let m = a.eval(0.5);
        assert_abs_diff_eq!(m.top()[[1, 0]].re, -1.0, epsilon = 1e-15);
        assert_eq!(m.top()[[0, 0]], c(0.0));
        assert_eq!(m.top()[[0, 1]], c(0.0));
    }

    #[test]
    fn coefficient_validation() {
        let mut a = CoefficientTower::new(2, 1.0).unwrap();
        let p = TrigPolynomial::constant(c(1.0), 1.0).unwrap();
        let err = a.insert(1, 2, p.clone()).unwrap_err();
        assert!(err.to_string().contains("upper-triangular entry (1,2)"));
        a.insert(2, 1, p.clone()).unwrap();
        assert!(a.insert(2, 1, p.clone()).is_err());
        assert!(a.insert(3, 1, p).is_err());
        let other = TrigPolynomial::constant(c(1.0), 2.0).unwrap();
        assert!(a.insert(1, 1, other).is_err());
        assert!(TrigPolynomial::new(c(0.0), vec![(1, c(1.0)), (1, c(2.0))], vec![], 1.0).is_err());
        assert!(TrigPolynomial::new(c(0.0), vec![(0, c(1.0))], vec![], 1.0).is_err());
        assert!(TrigPolynomial::constant(c(0.0), 0.0).is_err());
    }

    #[test]
    fn periodicity_examples() {
        let a = scalar(1.0, 1.0);
        let r = check_coefficient_periodicity(&a, 64, 1e-15);
        assert!(r.pass, "{r:?}");
        assert!(r.residual <= 1e-15);

        let zero = CoefficientTower::new(2, 1.0).unwrap();
        let r = check_coefficient_periodicity(&zero, 64, 1e-15);
        assert_eq!(r.residual, 0.0);
        assert!(r.pass);

        // Entries have period 1, the tower claims 0.7.
        let p = TrigPolynomial::new(c(1.0), vec![], vec![(1, c(1.0))], 1.0).unwrap();
        let wrong = CoefficientTower::new(1, 0.7)
            .unwrap()
            .with_entry(1, 1, p)
            .unwrap();
        let r = check_coefficient_periodicity(&wrong, 64, 1e-8);
        assert!(!r.pass);
        // At t = 0 the mismatch is |sin(1.4π)|.
        assert!(r.residual >= (1.4 * PI).sin().abs() - 1e-12);
        assert_eq!(r.tower_periodic, r.levelwise_periodic);
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let a = CoefficientTower::new(3, 1.0).unwrap();
        let sol = solve_fundamental(&a, 16, 1e-12).unwrap();
        for m in sol.top_samples() {
            assert_eq!(m, &NestedMatrix::identity(3));
        }
    }

    #[test]
    fn constant_scalar_closed_form() {
        let a = scalar(1.0, 0.0);
        let sol = solve_fundamental(&a, 200, 1e-10).unwrap();
        let end = sol.sample(1, 200).unwrap();
        assert_abs_diff_eq!(end[[0, 0]].re, std::f64::consts::E, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_scalar_closed_form() {
        let a = scalar(1.0, 1.0);
        let sol = solve_fundamental(&a, 2000, 1e-10).unwrap();
        assert_abs_diff_eq!(
            sol.sample(1, 2000).unwrap()[[0, 0]].re,
            std::f64::consts::E,
            epsilon = 1e-12
        );
        let half = (0.5 + 1.0 / PI).exp();
        assert_abs_diff_eq!(
            sol.sample(1, 1000).unwrap()[[0, 0]].re,
            half,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(half, 2.266666, epsilon = 1e-6);
    }

    #[test]
    fn too_few_steps() {
        let a = scalar(1.0, 1.0);
        assert!(matches!(
            solve_fundamental(&a, 4, 1e-8),
            Err(Error::Range(_))
        ));
        let p = TrigPolynomial::new(c(0.0), vec![], vec![(3, c(5.0))], 1.0).unwrap();
        let osc = CoefficientTower::new(1, 1.0)
            .unwrap()
            .with_entry(1, 1, p)
            .unwrap();
        assert!(matches!(
            solve_fundamental(&osc, 8, 1e-8),
            Err(Error::Accuracy(_))
        ));
    }

    #[test]
    fn normalization_preserves_monodromy() {
        let p = TrigPolynomial::new(c(0.3), vec![(1, c(0.5))], vec![], 2.0).unwrap();
        let a = CoefficientTower::new(1, 2.0)
            .unwrap()
            .with_entry(1, 1, p)
            .unwrap();
        let raw = solve_fundamental(&a, 400, 1e-9).unwrap();
        let norm = solve_fundamental(&a.normalized(), 400, 1e-9).unwrap();
        let m_raw = raw.sample(1, 400).unwrap()[[0, 0]];
        let m_norm = norm.sample(1, 400).unwrap()[[0, 0]];
        assert_abs_diff_eq!(m_raw.re, m_norm.re, epsilon = 1e-13);
        assert_abs_diff_eq!(m_raw.re, (0.6f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn shifted_samples_follow_the_cocycle() {
        let a = scalar(0.5, 1.0);
        let sol = solve_fundamental(&a, 400, 1e-9).unwrap();
        let shifted = sol.sample_shifted(100, 2).unwrap()[[0, 0]].re;
        let t: f64 = 0.25 + 2.0;
        let exact = (0.5 * t + (1.0 - (2.0 * PI * t).cos()) / (2.0 * PI)).exp();
        assert_abs_diff_eq!(shifted, exact, epsilon = 1e-10);
    }
}
