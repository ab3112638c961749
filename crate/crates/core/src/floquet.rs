//! Monodromy, the logarithm tower and the reduction to a constant coefficient.
//!
//! For a period-`T` coefficient the monodromy `M = Φ(T)` is an invertible
//! nested tower. With `L = compatible_log(M)` and `B̄ = L / T`:
//!
//! * `Exp(T B̄) = M`, so the monodromy has a logarithm in `H(C^∞)`;
//! * `F(t) = Exp(t B̄)` extends `n -> M^n` to a one-parameter group;
//! * `Q(t) = exp(t B) Φ(t)^{-1}` is `T`-periodic, `Q(0) = I`, and
//!   `y = Q(t) x` turns `x' = A(t) x` into `y' = B y`.
//!
//! Each of these is checked numerically by one of the `check_*` functions.

use ndarray::Array2;
use num_complex::Complex64;

use crate::linalg::{
    compatible_log_detailed, exp_tower, lower_inverse, lower_mul, lower_power, matrix_exp,
    CompatibleLog, LogBranch,
};
use crate::ode::{check_projective_consistency, CoefficientTower, SolutionTower};
use crate::tower::{max_entry_diff, InvertibleNestedMatrix, NestedMatrix};
use crate::{Error, Result};

const EXP_TOL: f64 = 1e-15;
const EXTENSION_N_MAX: i64 = 3;

/// `Φ(T)`, the value of the monodromy homomorphism at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyTower {
    pub m: InvertibleNestedMatrix,
    pub period: f64,
    pub period_normalized: bool,
}

/// Result of a single residual check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(residual: f64, tol: f64) -> Self {
        Self {
            residual,
            tol,
            pass: residual <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// Levelwise projective consistency of the fundamental solution.
    pub consistency: f64,
    /// `|Q(T) - Q(0)|`.
    pub periodicity: f64,
    /// `|(Q' + Q A) Q^{-1} - B|` over the grid.
    pub constancy: f64,
    /// `|Exp(L) - M|` per level.
    pub exp_log: f64,
    /// `|exp(nL) - M^n|`, group law of `F`, and `F(1/2)^2 = F(1)`.
    pub extension: f64,
    /// `|Φ' Φ^{-1} - A|` over interior samples.
    pub connection: f64,
}

#[derive(Clone, Debug)]
pub struct FloquetResult {
    pub monodromy: MonodromyTower,
    /// The logarithm `L` of the monodromy with its diagnostics.
    pub log: CompatibleLog,
    /// `B̄ = L / T`, the constant coefficient tower.
    pub bbar: NestedMatrix,
    pub times: Vec<f64>,
    /// Top-level `Q(t_s)`; `Q_n` is the leading `n x n` block.
    pub q_samples: Vec<NestedMatrix>,
    pub residuals: Residuals,
}

impl FloquetResult {
    /// `B = ε(B̄)`, the top level of the coefficient tower.
    pub fn b(&self) -> &Array2<Complex64> {
        self.bbar.top()
    }

    pub fn depth(&self) -> usize {
        self.bbar.depth()
    }

    /// `Q_n(t_s)`.
    pub fn q(&self, level: usize, s: usize) -> Result<Array2<Complex64>> {
        self.q_samples
            .get(s)
            .ok_or_else(|| Error::Range(format!("sample index {s} beyond the grid")))?
            .level(level)
    }

    /// `F(t) = Exp(t B̄)`.
    pub fn flow(&self, t: f64) -> Result<InvertibleNestedMatrix> {
        exp_tower(&self.bbar.scaled(Complex64::new(t, 0.0)), EXP_TOL)
    }
}

/// Reads `Φ(T)` off a one-period solution.
pub fn monodromy(sol: &SolutionTower) -> Result<MonodromyTower> {
    let period = sol.period();
    let end = *sol.times().last().expect("non-empty grid");
    if (end - period).abs() > 1e-12 * period.max(1.0) || sol.times()[0] != 0.0 {
        return Err(Error::Usage(format!(
            "solution grid spans [{}, {end}], expected [0, {period}]",
            sol.times()[0]
        )));
    }
    let top = sol.top_samples().last().expect("non-empty grid").clone();
    Ok(MonodromyTower {
        m: InvertibleNestedMatrix::new(top)?,
        period,
        period_normalized: period == 1.0,
    })
}

/// `α^#(n) = M^n`.
pub fn monodromy_hom(m: &MonodromyTower, n: i64) -> Result<InvertibleNestedMatrix> {
    let p = lower_power(m.m.top(), n)?;
    InvertibleNestedMatrix::new(NestedMatrix::from_lower_unchecked(p))
}

/// `max |α^#(m + n) - α^#(m) α^#(n)|` over `|m|, |n| <= n_max`.
pub fn check_monodromy_homomorphism(m: &MonodromyTower, n_max: i64, tol: f64) -> Result<Check> {
    let n_max = n_max.max(1);
    let powers = (-2 * n_max..=2 * n_max)
        .map(|k| lower_power(m.m.top(), k))
        .collect::<Result<Vec<_>>>()?;
    let at = |k: i64| &powers[(k + 2 * n_max) as usize];
    let mut residual = 0.0_f64;
    for a in -n_max..=n_max {
        for b in -n_max..=n_max {
            let prod = lower_mul(at(a), at(b));
            residual = residual.max(max_entry_diff(at(a + b), &prod));
        }
    }
    Ok(Check::new(residual, tol))
}

/// Runs the reduction on a solved system and fills every residual.
///
/// The residuals are recorded, not enforced; compare them against the
/// appropriate tolerances or use the `check_*` functions.
pub fn floquet_reduce(sol: &SolutionTower, branch: &LogBranch, tol: f64) -> Result<FloquetResult> {
    let consistency = check_projective_consistency(sol, tol);
    if !consistency.pass {
        return Err(Error::Verification(format!(
            "solution levels are inconsistent: residual {:.3e} > {tol:e}",
            consistency.residual
        )));
    }
    let mono = monodromy(sol)?;
    let log = compatible_log_detailed(&mono.m, branch, tol)?;
    let period = mono.period;
    let bbar = log.tower.scaled(Complex64::new(1.0 / period, 0.0));

    let depth = sol.depth();
    let mut q_samples = Vec::with_capacity(sol.times().len());
    for (s, &t) in sol.times().iter().enumerate() {
        let flow = matrix_exp(&bbar.top().mapv(|z| z * t), EXP_TOL)?;
        let phi_inv = lower_inverse(&sol.sample(depth, s)?)?;
        q_samples.push(NestedMatrix::from_lower_unchecked(lower_mul(
            &flow, &phi_inv,
        )));
    }

    let mut result = FloquetResult {
        monodromy: mono,
        log,
        bbar,
        times: sol.times().to_vec(),
        q_samples,
        residuals: Residuals::default(),
    };
    let exp_log = result.log.residual();
    let periodicity = check_q_periodicity(&result, tol).residual;
    let constancy = check_constant_reduction(&result, sol, sol.coefficient(), tol)?.residual;
    let extension = check_extension(&result, &result.monodromy, EXTENSION_N_MAX, tol)?.residual;
    let connection = connection_residual(sol, sol.coefficient())?;
    result.residuals = Residuals {
        consistency: consistency.residual,
        periodicity,
        constancy,
        exp_log,
        extension,
        connection,
    };
    Ok(result)
}

/// `max |Q(T) - Q(0)|`. Since `Q(T) = exp(L) M^{-1}`, this also measures the
/// exp-log round trip at the end of the period.
pub fn check_q_periodicity(result: &FloquetResult, tol: f64) -> Check {
    let first = result.q_samples.first().expect("non-empty grid");
    let last = result.q_samples.last().expect("non-empty grid");
    Check::new(max_entry_diff(first.top(), last.top()), tol)
}

/// Fourth-order finite-difference derivative of uniformly spaced samples:
/// central in the interior, five-point one-sided at the two samples nearest
/// each end.
pub fn fd_derivative(samples: &[Array2<Complex64>], h: f64) -> Result<Vec<Array2<Complex64>>> {
    let n = samples.len();
    if n < 5 {
        return Err(Error::Range(format!(
            "finite differences need at least 5 samples, got {n}"
        )));
    }
    let combo = |idx: [usize; 5], w: [f64; 5]| {
        let mut acc = samples[idx[0]].mapv(|z| z * w[0]);
        for k in 1..5 {
            acc.zip_mut_with(&samples[idx[k]], |a, &b| *a += b * w[k]);
        }
        acc.mapv(|z| z / (12.0 * h))
    };
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let d = match s {
            0 => combo([0, 1, 2, 3, 4], [-25.0, 48.0, -36.0, 16.0, -3.0]),
            1 => combo([0, 1, 2, 3, 4], [-3.0, -10.0, 18.0, -6.0, 1.0]),
            s if s == n - 2 => combo(
                [n - 5, n - 4, n - 3, n - 2, n - 1],
                [-1.0, 6.0, -18.0, 10.0, 3.0],
            ),
            s if s == n - 1 => combo(
                [n - 5, n - 4, n - 3, n - 2, n - 1],
                [3.0, -16.0, 36.0, -48.0, 25.0],
            ),
            s => combo([s - 2, s - 1, s, s + 1, s + 2], [1.0, -8.0, 0.0, 8.0, -1.0]),
        };
        out.push(d);
    }
    Ok(out)
}

/// `max_s |(Q'(t_s) + Q(t_s) A(t_s)) Q(t_s)^{-1} - B|` with `Q'` from
/// [`fd_derivative`]. At `t = 0`, where `Q = I`, this is `B = A(0) + Q'(0)`.
pub fn check_constant_reduction(
    result: &FloquetResult,
    sol: &SolutionTower,
    a: &CoefficientTower,
    tol: f64,
) -> Result<Check> {
    let q: Vec<Array2<Complex64>> = result.q_samples.iter().map(|m| m.top().clone()).collect();
    let qdot = fd_derivative(&q, sol.step_size())?;
    let b = result.b();
    let mut residual = 0.0_f64;
    for (s, &t) in result.times.iter().enumerate() {
        let lhs = &qdot[s] + &lower_mul(&q[s], &a.eval_top(t));
        let reconstructed = lower_mul(&lhs, &lower_inverse(&q[s])?);
        residual = residual.max(max_entry_diff(&reconstructed, b));
    }
    Ok(Check::new(residual, tol))
}

/// Compares `F(n) = exp(nL)` with `M^n` for `|n| <= n_max`, checks the group
/// law `F(m + n) = F(m) F(n)` on the same range, and spot-checks
/// `F(1/2)^2 = F(1)`. Times are in units of the period.
pub fn check_extension(
    result: &FloquetResult,
    m: &MonodromyTower,
    n_max: i64,
    tol: f64,
) -> Result<Check> {
    let n_max = n_max.max(1);
    let l = result.log.tower.top();
    let flow = |t: f64| matrix_exp(&l.mapv(|z| z * t), EXP_TOL);

    let range: Vec<i64> = (-2 * n_max..=2 * n_max).collect();
    let flows = range
        .iter()
        .map(|&k| flow(k as f64))
        .collect::<Result<Vec<_>>>()?;
    let at = |k: i64| &flows[(k + 2 * n_max) as usize];

    let mut residual = 0.0_f64;
    for n in -n_max..=n_max {
        let power = lower_power(m.m.top(), n)?;
        residual = residual.max(max_entry_diff(at(n), &power));
    }
    for a in -n_max..=n_max {
        for b in -n_max..=n_max {
            residual = residual.max(max_entry_diff(at(a + b), &lower_mul(at(a), at(b))));
        }
    }
    let half = flow(0.5)?;
    residual = residual.max(max_entry_diff(&lower_mul(&half, &half), at(1)));
    Ok(Check::new(residual, tol))
}

/// `max |Φ'(t) Φ(t)^{-1} - A(t)|` at the top level over interior samples,
/// with `Φ'` from central differences.
pub fn connection_residual(sol: &SolutionTower, a: &CoefficientTower) -> Result<f64> {
    let phi: Vec<Array2<Complex64>> = sol.top_samples().iter().map(|m| m.top().clone()).collect();
    let phidot = fd_derivative(&phi, sol.step_size())?;
    let n = phi.len();
    let mut residual = 0.0_f64;
    for s in 2..n - 2 {
        let theta = lower_mul(&phidot[s], &lower_inverse(&phi[s])?);
        residual = residual.max(max_entry_diff(&theta, &a.eval_top(sol.times()[s])));
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{solve_fundamental, TrigPolynomial};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_osc() -> CoefficientTower {
        let p = TrigPolynomial::new(c(1.0), vec![], vec![(1, c(1.0))], 1.0).unwrap();
        CoefficientTower::new(1, 1.0)
            .unwrap()
            .with_entry(1, 1, p)
            .unwrap()
    }

    #[test]
    fn zero_coefficient_reduces_trivially() {
        let a = CoefficientTower::new(3, 1.0).unwrap();
        let sol = solve_fundamental(&a, 64, 1e-10).unwrap();
        let mono = monodromy(&sol).unwrap();
        assert_eq!(mono.m.as_nested(), &NestedMatrix::identity(3));
        let r = floquet_reduce(&sol, &LogBranch::principal(), 1e-10).unwrap();
        assert_eq!(r.bbar, NestedMatrix::zeros(3));
        for q in &r.q_samples {
            assert_eq!(q, &NestedMatrix::identity(3));
        }
        assert!(r.residuals.constancy <= 1e-10);
        assert!(r.residuals.connection <= 1e-12);
    }

    #[test]
    fn scalar_oscillatory_reduction() {
        let a = scalar_osc();
        let sol = solve_fundamental(&a, 2000, 1e-10).unwrap();
        let r = floquet_reduce(&sol, &LogBranch::principal(), 1e-8).unwrap();
        assert_abs_diff_eq!(r.monodromy.m.top()[[0, 0]].re, E, epsilon = 1e-10);
        assert_abs_diff_eq!(r.b()[[0, 0]].re, 1.0, epsilon = 1e-10);
        let q_half = r.q(1, 1000).unwrap()[[0, 0]].re;
        assert_abs_diff_eq!(q_half, (-1.0 / PI).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(q_half, 0.727377, epsilon = 1e-6);
        assert!(check_q_periodicity(&r, 1e-9).pass);
        assert!(check_constant_reduction(&r, &sol, &a, 1e-6).unwrap().pass);
    }

    #[test]
    fn monodromy_powers() {
        let a = scalar_osc();
        let sol = solve_fundamental(&a, 400, 1e-8).unwrap();
        let mono = monodromy(&sol).unwrap();
        assert_eq!(
            monodromy_hom(&mono, 0).unwrap(),
            InvertibleNestedMatrix::identity(1)
        );
        assert_eq!(monodromy_hom(&mono, 1).unwrap(), mono.m);
        let inv2 = monodromy_hom(&mono, -2).unwrap();
        assert_abs_diff_eq!(inv2.top()[[0, 0]].re, (-2.0f64).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(inv2.top()[[0, 0]].re, 0.135335, epsilon = 1e-6);
    }

    #[test]
    fn grid_must_end_at_period() {
        let a = scalar_osc();
        let sol = solve_fundamental(&a, 16, 1e-3).unwrap();
        let times: Vec<f64> = sol.times().iter().map(|t| t * 0.5).collect();
        let broken = SolutionTower::from_parts(
            a,
            times,
            sol.top_samples().to_vec(),
            None,
            4,
            sol.error_estimate(),
        )
        .unwrap();
        assert!(matches!(monodromy(&broken), Err(Error::Usage(_))));
    }

    #[test]
    fn fd_derivative_of_quartic_is_exact() {
        let h = 0.1;
        let samples: Vec<Array2<Complex64>> = (0..9)
            .map(|s| {
                let t = s as f64 * h;
                Array2::from_elem((1, 1), c(t.powi(4) - 2.0 * t))
            })
            .collect();
        let d = fd_derivative(&samples, h).unwrap();
        for (s, m) in d.iter().enumerate() {
            let t = s as f64 * h;
            assert_abs_diff_eq!(m[[0, 0]].re, 4.0 * t.powi(3) - 2.0, epsilon = 1e-12);
        }
    }
}
