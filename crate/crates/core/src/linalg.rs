//! Matrix exponential, the φ-series matrix and the projective-compatible
//! logarithm of an invertible nested tower.
//!
//! All products of lower-triangular operands go through [`lower_mul`], which
//! never touches entries above the diagonal. Nested structure is therefore
//! preserved exactly, not up to roundoff.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::tower::{max_upper_modulus, InvertibleNestedMatrix, NestedMatrix};
use crate::{Error, Result, SINGULAR_THRESHOLD};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Scaled argument norm targeted by [`matrix_exp`] before the Taylor core.
const EXP_SCALED_NORM: f64 = 0.5;
const EXP_MAX_SQUARINGS: u32 = 60;
const EXP_MAX_TERMS: usize = 40;

/// Stopping tolerance used by [`compatible_log`] for the φ-series.
pub const PHI_TOL: f64 = 1e-13;
pub const PHI_MAX_TERMS: usize = 400;

/// Max-row-sum norm.
pub fn row_sum_norm(a: &Array2<Complex64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// True when every entry strictly above the diagonal is exactly zero.
pub fn is_lower_triangular(a: &Array2<Complex64>) -> bool {
    a.is_square() && max_upper_modulus(a) == 0.0
}

/// Product of two lower-triangular matrices. Upper entries of the operands are
/// ignored and those of the result are exactly zero.
pub fn lower_mul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    debug_assert_eq!(a.dim(), (n, n));
    debug_assert_eq!(b.dim(), (n, n));
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut acc = ZERO;
            for k in j..=i {
                acc += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

fn mul(a: &Array2<Complex64>, b: &Array2<Complex64>, lower: bool) -> Array2<Complex64> {
    if lower {
        lower_mul(a, b)
    } else {
        a.dot(b)
    }
}

fn require_square(a: &Array2<Complex64>) -> Result<usize> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Shape(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn require_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Range(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// `e^B` by scaling and squaring around a truncated Taylor series.
///
/// `B` is scaled by `2^-s` until its max-row-sum norm is at most 0.5, the
/// series is summed until terms drop below `min(tol, ε)` relative to the
/// partial sum, and the result is squared `s` times. Lower-triangular input
/// gives lower-triangular output with exact zeros.
pub fn matrix_exp(b: &Array2<Complex64>, tol: f64) -> Result<Array2<Complex64>> {
    let n = require_square(b)?;
    require_tol(tol)?;
    if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(
            "matrix_exp input has non-finite entries".into(),
        ));
    }
    if n == 1 {
        let e = b[[0, 0]].exp();
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::Numeric(format!("exp({}) overflows", b[[0, 0]])));
        }
        return Ok(Array2::from_elem((1, 1), e));
    }

    let lower = is_lower_triangular(b);
    let norm = row_sum_norm(b);
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > EXP_SCALED_NORM {
        scaled_norm *= 0.5;
        squarings += 1;
        if squarings > EXP_MAX_SQUARINGS {
            return Err(Error::Numeric(format!(
                "matrix_exp argument norm {norm:e} is too large"
            )));
        }
    }
    let x = b.mapv(|z| z * 0.5_f64.powi(squarings as i32));

    let stop = tol.min(f64::EPSILON);
    let mut sum: Array2<Complex64> = Array2::eye(n);
    let mut term: Array2<Complex64> = Array2::eye(n);
    for k in 1..=EXP_MAX_TERMS {
        term = mul(&term, &x, lower).mapv(|z| z / k as f64);
        sum += &term;
        if row_sum_norm(&term) <= stop * row_sum_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum, lower);
    }
    if sum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(
            "matrix_exp overflowed while squaring".into(),
        ));
    }
    Ok(sum)
}

/// The generalized exponential `Exp(B̄) = (exp B_1, ..., exp B_N)`.
///
/// Computed once on the top level: the leading blocks of `exp(B_N)` are the
/// `exp(B_n)` because `B_N` is lower triangular.
pub fn exp_tower(bbar: &NestedMatrix, tol: f64) -> Result<InvertibleNestedMatrix> {
    let e = matrix_exp(bbar.top(), tol)?;
    InvertibleNestedMatrix::new(NestedMatrix::from_lower_unchecked(e))
}

/// `e^z - 1` without cancellation near zero.
pub fn expm1(z: Complex64) -> Complex64 {
    let (sin_half, _) = (z.im * 0.5).sin_cos();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * sin_half * sin_half;
    let im = z.re.exp() * z.im.sin();
    Complex64::new(re, im)
}

/// `(e^b - e^c) / (b - c)`, continued by `e^c` at `b = c`.
pub fn exp_divided_difference(b: Complex64, c: Complex64) -> Complex64 {
    let d = b - c;
    if d == ZERO {
        c.exp()
    } else {
        c.exp() * expm1(d) / d
    }
}

/// Principal logarithm with imaginary part in `(-π, π]`.
pub fn principal_log(z: Complex64) -> Complex64 {
    let mut l = z.ln();
    if l.im == -std::f64::consts::PI {
        l.im = std::f64::consts::PI;
    }
    l
}

/// Branch choice for the scalar logarithms `log λ_k` on the diagonal.
///
/// Every level uses the principal branch unless an override assigns it a
/// winding `m`, in which case `log λ_k = Log λ_k + 2πi m`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogBranch {
    windings: Vec<(usize, i64)>,
}

impl LogBranch {
    pub fn principal() -> Self {
        Self::default()
    }

    pub fn from_windings(windings: Vec<(usize, i64)>) -> Result<Self> {
        let mut branch = Self::principal();
        for (level, m) in windings {
            branch = branch.with_winding(level, m)?;
        }
        Ok(branch)
    }

    /// Adds an override at 1-based `level`.
    pub fn with_winding(mut self, level: usize, winding: i64) -> Result<Self> {
        if level == 0 {
            return Err(Error::Range("winding overrides use 1-based levels".into()));
        }
        if self.windings.iter().any(|&(l, _)| l == level) {
            return Err(Error::Validation(format!(
                "duplicate winding override for level {level}"
            )));
        }
        self.windings.push((level, winding));
        Ok(self)
    }

    pub fn windings(&self) -> &[(usize, i64)] {
        &self.windings
    }

    pub fn winding(&self, level: usize) -> i64 {
        self.windings
            .iter()
            .find(|&&(l, _)| l == level)
            .map_or(0, |&(_, m)| m)
    }

    pub fn validate(&self, depth: usize) -> Result<()> {
        match self.windings.iter().find(|&&(l, _)| l == 0 || l > depth) {
            Some(&(l, _)) => Err(Error::Range(format!(
                "winding override references level {l}, tower depth is {depth}"
            ))),
            None => Ok(()),
        }
    }

    pub fn log(&self, level: usize, lambda: Complex64) -> Complex64 {
        let m = self.winding(level) as f64;
        principal_log(lambda) + Complex64::new(0.0, 2.0 * std::f64::consts::PI * m)
    }
}

/// The matrix `S = Σ_{k≥1} (1/k!) Σ_{j=1}^{k} B^{k-j} c^{j-1}` for a
/// lower-triangular `B` and a scalar center `c`.
#[derive(Clone, Debug)]
pub struct PhiMatrix {
    pub s: Array2<Complex64>,
    pub center: Complex64,
    pub source: Array2<Complex64>,
    /// Closed-form diagonal `γ_i = (e^{b_i} - e^c)/(b_i - c)`.
    pub gammas: Vec<Complex64>,
    pub terms: usize,
}

/// Sums the φ-series for `(B, c)`.
///
/// Terms follow the recurrence `U_1 = I`,
/// `U_{k+1} = (B U_k + c^k/k! I) / (k + 1)`. Summation stops once the added
/// term is below `tol` relative to the partial sum and the a priori tail bound
/// `2 r^k / k!` with `r = max(|B|, |c|)` is too. The diagonal is then compared
/// against [`exp_divided_difference`].
pub fn phi_series(
    b: &Array2<Complex64>,
    c: Complex64,
    tol: f64,
    max_terms: usize,
) -> Result<PhiMatrix> {
    let n = require_square(b)?;
    require_tol(tol)?;
    if !is_lower_triangular(b) {
        return Err(Error::Shape(
            "phi_series expects a lower-triangular matrix".into(),
        ));
    }
    let r = row_sum_norm(b).max(c.norm());
    let diag: Vec<Complex64> = b.diag().to_vec();

    let mut sum: Array2<Complex64> = Array2::eye(n);
    let mut term: Array2<Complex64> = Array2::eye(n);
    // c^k / k!
    let mut power = c;
    // r^k / k!
    let mut bound = r;
    // Running magnitudes of the diagonal terms, for the roundoff floor.
    let mut mag_term = vec![1.0_f64; n];
    let mut mag_sum = vec![1.0_f64; n];
    let mut terms = 1;
    let mut converged = false;

    for k in 1..max_terms {
        let mut next = lower_mul(b, &term);
        for i in 0..n {
            next[[i, i]] += power;
        }
        next.mapv_inplace(|z| z / (k + 1) as f64);
        for i in 0..n {
            mag_term[i] = (diag[i].norm() * mag_term[i] + power.norm()) / (k + 1) as f64;
            mag_sum[i] += mag_term[i];
        }
        sum += &next;
        terms = k + 1;

        let sum_norm = row_sum_norm(&sum);
        let tail_ok = (k + 1) as f64 > 2.0 * r && 2.0 * bound <= tol * sum_norm;
        if row_sum_norm(&next) <= tol * sum_norm && tail_ok {
            converged = true;
            break;
        }
        term = next;
        power = power * c / (k + 1) as f64;
        bound = bound * r / (k + 1) as f64;
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "phi series did not converge within {max_terms} terms (norm bound {r:.3e})"
        )));
    }
    if sum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(
            "phi series produced non-finite entries".into(),
        ));
    }

    let gammas: Vec<Complex64> = diag
        .iter()
        .map(|&bi| exp_divided_difference(bi, c))
        .collect();
    for (i, gamma) in gammas.iter().enumerate() {
        let err = (sum[[i, i]] - gamma).norm();
        let allowed = 10.0 * tol * gamma.norm() + 8.0 * terms as f64 * f64::EPSILON * mag_sum[i];
        if !(err <= allowed) {
            return Err(Error::Numeric(format!(
                "phi series diagonal {} = {} disagrees with divided difference {} (|Δ| = {:.3e})",
                i + 1,
                sum[[i, i]],
                gamma,
                err
            )));
        }
    }

    Ok(PhiMatrix {
        s: sum,
        center: c,
        source: b.clone(),
        gammas,
        terms,
    })
}

/// Solves the row system `y · S = μ` for lower-triangular `S`.
///
/// `S^T` is upper triangular, so this is back substitution starting from the
/// last component of `y`.
pub fn solve_row_lower(s: &Array2<Complex64>, mu: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = require_square(s)?;
    if mu.len() != n {
        return Err(Error::Shape(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            mu.len()
        )));
    }
    let mut y = vec![ZERO; n];
    for j in (0..n).rev() {
        let pivot = s[[j, j]];
        if !(pivot.norm() > SINGULAR_THRESHOLD) {
            return Err(Error::Conditioning(format!(
                "pivot {} at position {} is numerically zero",
                pivot,
                j + 1
            )));
        }
        let mut acc = mu[j];
        for i in (j + 1)..n {
            acc -= y[i] * s[[i, j]];
        }
        y[j] = acc / pivot;
    }
    Ok(y)
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub fn lower_inverse(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = require_square(m)?;
    for i in 0..n {
        if !(m[[i, i]].norm() > SINGULAR_THRESHOLD) {
            return Err(Error::Conditioning(format!(
                "diagonal entry {} = {} is numerically zero",
                i + 1,
                m[[i, i]]
            )));
        }
    }
    let mut inv = Array2::zeros((n, n));
    for j in 0..n {
        inv[[j, j]] = Complex64::new(1.0, 0.0) / m[[j, j]];
        for i in (j + 1)..n {
            let mut acc = ZERO;
            for k in j..i {
                acc += m[[i, k]] * inv[[k, j]];
            }
            inv[[i, j]] = -acc / m[[i, i]];
        }
    }
    Ok(inv)
}

/// `M^n` for lower-triangular `M` and any integer `n`, by repeated squaring.
pub fn lower_power(m: &Array2<Complex64>, n: i64) -> Result<Array2<Complex64>> {
    let size = require_square(m)?;
    let mut base = if n < 0 { lower_inverse(m)? } else { m.clone() };
    let mut e = n.unsigned_abs();
    let mut acc: Array2<Complex64> = Array2::eye(size);
    while e > 0 {
        if e & 1 == 1 {
            acc = lower_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = lower_mul(&base, &base);
        }
    }
    Ok(acc)
}

/// Output of [`compatible_log_detailed`].
#[derive(Clone, Debug)]
pub struct CompatibleLog {
    /// The logarithm tower `B̄ = (B_1, ..., B_N)`.
    pub tower: NestedMatrix,
    /// `log λ_k` as placed on the diagonal.
    pub logs: Vec<Complex64>,
    /// `gammas[n - 1]` holds the diagonal of `S_n` used to extend `B_n`.
    pub gammas: Vec<Vec<Complex64>>,
    /// Per-level max-entry error of `exp(B_n) - M_n`.
    pub level_residuals: Vec<f64>,
}

impl CompatibleLog {
    pub fn residual(&self) -> f64 {
        self.level_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_gamma_modulus(&self) -> f64 {
        self.gammas
            .iter()
            .flatten()
            .map(|g| g.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// A logarithm tower `B̄` with `Exp(B̄) = M` whose levels are nested.
pub fn compatible_log(
    m: &InvertibleNestedMatrix,
    branch: &LogBranch,
    tol: f64,
) -> Result<NestedMatrix> {
    compatible_log_detailed(m, branch, tol).map(|l| l.tower)
}

/// [`compatible_log`] together with the intermediate quantities.
///
/// `B_1 = log λ_1`, and `B_{n+1} = [[B_n, 0], [y_n, log λ_{n+1}]]` where
/// `y_n S_n = μ_n` and `S_n = phi_series(B_n, log λ_{n+1})`. The exponential
/// of the lower-left block of `B_{n+1}` is `y_n S_n`, so the new row of
/// `exp(B_{n+1})` matches `μ_n` while the leading block stays `exp(B_n)`.
pub fn compatible_log_detailed(
    m: &InvertibleNestedMatrix,
    branch: &LogBranch,
    tol: f64,
) -> Result<CompatibleLog> {
    require_tol(tol)?;
    let depth = m.depth();
    branch.validate(depth)?;
    let top = m.top();

    let logs: Vec<Complex64> = (0..depth).map(|k| branch.log(k + 1, top[[k, k]])).collect();

    let mut b: Array2<Complex64> = Array2::zeros((depth, depth));
    b[[0, 0]] = logs[0];
    let mut gammas = Vec::with_capacity(depth.saturating_sub(1));
    for n in 1..depth {
        let c = logs[n];
        let bn = b.slice(s![..n, ..n]).to_owned();
        let phi = phi_series(&bn, c, PHI_TOL, PHI_MAX_TERMS)?;
        if let Some((i, g)) = phi
            .gammas
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.norm() > SINGULAR_THRESHOLD))
        {
            return Err(Error::Conditioning(format!(
                "γ_{} = {} vanishes while extending level {} (log λ_{} - log λ_{} is a nonzero multiple of 2πi)",
                i + 1,
                g,
                n,
                i + 1,
                n + 1
            )));
        }
        let mu = top.slice(s![n, ..n]).to_vec();
        let y = solve_row_lower(&phi.s, &mu)?;
        for (j, yj) in y.into_iter().enumerate() {
            b[[n, j]] = yj;
        }
        b[[n, n]] = c;
        gammas.push(phi.gammas);
    }

    let tower = NestedMatrix::from_lower_unchecked(b);
    let e = matrix_exp(tower.top(), f64::EPSILON)?;
    let mut level_residuals = Vec::with_capacity(depth);
    let mut running = 0.0_f64;
    for n in 0..depth {
        for j in 0..=n {
            running = running.max((e[[n, j]] - top[[n, j]]).norm());
        }
        level_residuals.push(running);
    }
    let out = CompatibleLog {
        tower,
        logs,
        gammas,
        level_residuals,
    };
    if !(out.residual() <= tol) {
        return Err(Error::Verification(format!(
            "exp of the logarithm tower misses the input by {:.3e} (tol {tol:e})",
            out.residual()
        )));
    }
    Ok(out)
}
