//! The projective tower `C^1 <- C^2 <- ... <- C^N` and projective systems of
//! linear maps on it.
//!
//! The connecting morphism `ρ_{j,i}: C^j -> C^i` drops coordinates `i+1..=j`.
//! A family `(f_n)` of linear maps commutes with every `ρ_{j,i}` exactly when
//! each matrix `M_{n+1}` has the block form
//!
//! ```text
//! M_{n+1} = | M_n   0   |
//!           | μ_n   λ_n |
//! ```
//!
//! so the whole family is carried by one lower-triangular `N x N` matrix whose
//! leading principal blocks are the levels. [`NestedMatrix`] stores exactly
//! that matrix.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::{Error, Result, DEFAULT_PATTERN_TOL, SINGULAR_THRESHOLD};

/// Finite truncation of the `C^∞` tower: levels `1..=depth`, level `n` is `C^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tower {
    depth: usize,
}

impl Tower {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Range("tower depth must be at least 1".into()));
        }
        Ok(Self { depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `ρ_{j,i}` with `j = x.len()`: keeps the first `to_level` coordinates.
    pub fn project(&self, x: &[Complex64], to_level: usize) -> Result<Vec<Complex64>> {
        if x.len() > self.depth {
            return Err(Error::Range(format!(
                "vector of length {} does not live in a tower of depth {}",
                x.len(),
                self.depth
            )));
        }
        if to_level == 0 || to_level > x.len() {
            return Err(Error::Range(format!(
                "cannot project from level {} to level {}",
                x.len(),
                to_level
            )));
        }
        Ok(x[..to_level].to_vec())
    }
}

/// The seminorm `p_i(x) = max_{k <= i} |x_k|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seminorm {
    index: usize,
}

impl Seminorm {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::Range("seminorm index starts at 1".into()));
        }
        Ok(Self { index })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn eval(&self, x: &[Complex64]) -> Result<f64> {
        seminorm(x, self.index)
    }
}

/// `p_i(x)`, the largest modulus among the first `i` coordinates of `x`.
pub fn seminorm(x: &[Complex64], i: usize) -> Result<f64> {
    if i == 0 || i > x.len() {
        return Err(Error::Range(format!(
            "seminorm index {} out of range for a vector of length {}",
            i,
            x.len()
        )));
    }
    Ok(x[..i].iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Whether the square matrix `f` defines a projective system of maps, i.e.
/// commutes with every truncation. Entries above the diagonal may be nonzero
/// up to `tol` in modulus.
pub fn is_projective_map(f: &Array2<Complex64>, tol: f64) -> Result<bool> {
    if !f.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    Ok(max_upper_modulus(f) <= tol)
}

pub(crate) fn max_upper_modulus(f: &Array2<Complex64>) -> f64 {
    let n = f.nrows();
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in (r + 1)..f.ncols() {
            worst = worst.max(f[[r, c]].norm());
        }
    }
    worst
}

/// A projective system `(M_1, ..., M_N)` of linear maps on the tower, an
/// element of `H(C^∞)` truncated at depth `N`.
///
/// Stored as the single top-level matrix `M_N`. Entries above the diagonal are
/// exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedMatrix {
    top: Array2<Complex64>,
}

impl NestedMatrix {
    /// Validates `m` against the nested block pattern. Upper entries of modulus
    /// at most `tol` are replaced with exact zeros.
    pub fn from_matrix(mut m: Array2<Complex64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::Range("tower depth must be at least 1".into()));
        }
        let n = m.nrows();
        for r in 0..n {
            for c in (r + 1)..n {
                let v = m[[r, c]];
                if !(v.norm() <= tol) {
                    return Err(Error::Validation(format!(
                        "entry ({}, {}) = {} breaks the nested pattern",
                        r + 1,
                        c + 1,
                        v
                    )));
                }
                m[[r, c]] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { top: m })
    }

    /// Same as [`NestedMatrix::from_matrix`] with the default pattern tolerance.
    pub fn from_lower(m: Array2<Complex64>) -> Result<Self> {
        Self::from_matrix(m, DEFAULT_PATTERN_TOL)
    }

    /// Callers guarantee square, non-empty and exactly lower-triangular.
    pub(crate) fn from_lower_unchecked(m: Array2<Complex64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() > 0);
        debug_assert_eq!(max_upper_modulus(&m), 0.0);
        Self { top: m }
    }

    pub fn identity(depth: usize) -> Self {
        Self::from_lower_unchecked(Array2::eye(depth.max(1)))
    }

    pub fn zeros(depth: usize) -> Self {
        Self::from_lower_unchecked(Array2::zeros((depth.max(1), depth.max(1))))
    }

    pub fn depth(&self) -> usize {
        self.top.nrows()
    }

    pub fn top(&self) -> &Array2<Complex64> {
        &self.top
    }

    pub fn into_inner(self) -> Array2<Complex64> {
        self.top
    }

    /// `M_n`, the leading `n x n` principal block.
    pub fn level(&self, n: usize) -> Result<Array2<Complex64>> {
        self.check_level(n)?;
        Ok(self.top.slice(s![..n, ..n]).to_owned())
    }

    /// The tower `(M_1, ..., M_n)`.
    pub fn truncate(&self, to_level: usize) -> Result<NestedMatrix> {
        Ok(Self::from_lower_unchecked(self.level(to_level)?))
    }

    /// `λ_k`, the `k`-th diagonal entry (1-based).
    pub fn lambda(&self, k: usize) -> Result<Complex64> {
        self.check_level(k)?;
        Ok(self.top[[k - 1, k - 1]])
    }

    /// `μ_n`: the first `n` entries of row `n + 1`, linking `M_n` to `M_{n+1}`.
    pub fn mu(&self, n: usize) -> Result<Vec<Complex64>> {
        if n == 0 || n >= self.depth() {
            return Err(Error::Range(format!(
                "μ_n needs 1 <= n < {}, got {}",
                self.depth(),
                n
            )));
        }
        Ok(self.top.slice(s![n, ..n]).to_vec())
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.top.diag().to_vec()
    }

    pub fn scaled(&self, factor: Complex64) -> NestedMatrix {
        Self::from_lower_unchecked(self.top.mapv(|z| z * factor))
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.depth() {
            return Err(Error::Range(format!(
                "level {} out of range 1..={}",
                n,
                self.depth()
            )));
        }
        Ok(())
    }
}

/// `truncate` as a free function.
pub fn truncate(m: &NestedMatrix, to_level: usize) -> Result<NestedMatrix> {
    m.truncate(to_level)
}

/// An element of `H°(C^∞)`: a nested tower whose every level is invertible,
/// i.e. every diagonal entry has modulus above [`SINGULAR_THRESHOLD`].
#[derive(Clone, Debug, PartialEq)]
pub struct InvertibleNestedMatrix(NestedMatrix);

impl InvertibleNestedMatrix {
    pub fn new(m: NestedMatrix) -> Result<Self> {
        for (k, lambda) in m.diagonal().iter().enumerate() {
            if !(lambda.norm() > SINGULAR_THRESHOLD) {
                return Err(Error::Conditioning(format!(
                    "diagonal entry λ_{} = {} is numerically zero",
                    k + 1,
                    lambda
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn identity(depth: usize) -> Self {
        Self(NestedMatrix::identity(depth))
    }

    pub fn as_nested(&self) -> &NestedMatrix {
        &self.0
    }

    pub fn into_nested(self) -> NestedMatrix {
        self.0
    }

    pub fn truncate(&self, to_level: usize) -> Result<InvertibleNestedMatrix> {
        Ok(Self(self.0.truncate(to_level)?))
    }
}

impl std::ops::Deref for InvertibleNestedMatrix {
    type Target = NestedMatrix;

    fn deref(&self) -> &NestedMatrix {
        &self.0
    }
}

/// Largest entrywise modulus of `a - b`. Shapes must agree.
pub fn max_entry_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "max_entry_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
