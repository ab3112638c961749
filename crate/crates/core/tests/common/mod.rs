#![allow(dead_code)]

use floquet_frechet::ode::{CoefficientTower, TrigPolynomial};
use floquet_frechet::{Array2, Complex64, InvertibleNestedMatrix, NestedMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_complex(rng: &mut impl Rng, bound: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-bound..bound), rng.gen_range(-bound..bound))
}

pub fn random_dense(rng: &mut impl Rng, n: usize, bound: f64) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |_| random_complex(rng, bound))
}

pub fn random_lower(rng: &mut impl Rng, n: usize, bound: f64) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(r, col)| {
        if col <= r {
            random_complex(rng, bound)
        } else {
            c(0.0)
        }
    })
}

/// Invertible nested tower: diagonal moduli in `[0.2, 5]` with uniform phase,
/// off-diagonal entries with real and imaginary parts bounded by `off`.
pub fn random_invertible_tower(rng: &mut impl Rng, n: usize, off: f64) -> InvertibleNestedMatrix {
    let mut m = random_lower(rng, n, off);
    for k in 0..n {
        let modulus = rng.gen_range(0.2..5.0);
        let phase = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        m[[k, k]] = Complex64::from_polar(modulus, phase);
    }
    InvertibleNestedMatrix::new(NestedMatrix::from_lower(m).unwrap()).unwrap()
}

/// Random lower-triangular trig-polynomial coefficient: every entry gets a
/// constant and up to two cos/sin harmonics from `1..=max_harmonic`, all
/// coefficients of modulus at most `bound`.
pub fn random_coefficient(
    rng: &mut impl Rng,
    depth: usize,
    max_harmonic: u32,
    bound: f64,
) -> CoefficientTower {
    let mut a = CoefficientTower::new(depth, 1.0).unwrap();
    let coeff = |rng: &mut dyn rand::RngCore| {
        let modulus = rng.gen_range(0.0..bound);
        let phase = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        Complex64::from_polar(modulus, phase)
    };
    for r in 1..=depth {
        for col in 1..=r {
            let constant = coeff(rng);
            let mut harmonics: Vec<u32> = (1..=max_harmonic).collect();
            let mut pick = |rng: &mut dyn rand::RngCore| -> Vec<(u32, Complex64)> {
                let count = rng.gen_range(0..=2usize.min(harmonics.len()));
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let idx = rng.gen_range(0..harmonics.len());
                    let k = harmonics.swap_remove(idx);
                    out.push((k, coeff(rng)));
                }
                out
            };
            let cos = pick(rng);
            let sin = pick(rng);
            let p = TrigPolynomial::new(constant, cos, sin, 1.0).unwrap();
            a.insert(r, col, p).unwrap();
        }
    }
    a
}

pub fn scalar_coefficient(constant: f64, sin: f64) -> CoefficientTower {
    let p = TrigPolynomial::new(c(constant), vec![], vec![(1, c(sin))], 1.0).unwrap();
    CoefficientTower::new(1, 1.0)
        .unwrap()
        .with_entry(1, 1, p)
        .unwrap()
}

/// `A_2 = [[d, 0], [cos 2πt, d]]`.
pub fn two_level(diag: f64) -> CoefficientTower {
    let mut a = CoefficientTower::new(2, 1.0).unwrap();
    if diag != 0.0 {
        a.insert(1, 1, TrigPolynomial::constant(c(diag), 1.0).unwrap())
            .unwrap();
        a.insert(2, 2, TrigPolynomial::constant(c(diag), 1.0).unwrap())
            .unwrap();
    }
    a.insert(
        2,
        1,
        TrigPolynomial::new(c(0.0), vec![(1, c(1.0))], vec![], 1.0).unwrap(),
    )
    .unwrap();
    a
}

pub fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `ρ_{N,i} ∘ f = f_i ∘ ρ_{N,i}` on every standard basis vector, for every `i`.
pub fn commutes_with_truncations(f: &Array2<Complex64>, tol: f64) -> bool {
    let n = f.nrows();
    for i in 1..=n {
        let fi = f.slice(ndarray::s![..i, ..i]);
        for k in 0..n {
            // f e_k, truncated to level i.
            let lhs: Vec<Complex64> = (0..i).map(|r| f[[r, k]]).collect();
            // f_i (ρ e_k): zero when k >= i.
            let rhs: Vec<Complex64> = (0..i)
                .map(|r| if k < i { fi[[r, k]] } else { c(0.0) })
                .collect();
            if lhs.iter().zip(&rhs).any(|(a, b)| (a - b).norm() > tol) {
                return false;
            }
        }
    }
    true
}
