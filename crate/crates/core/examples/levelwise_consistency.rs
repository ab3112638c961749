//! Integrates every level of a tower independently and checks that the
//! results agree under truncation.

use floquet_frechet::ode::{
    check_projective_consistency, solve_fundamental, solve_fundamental_levelwise, TrigPolynomial,
};
use floquet_frechet::{CoefficientTower, Complex64};

fn main() -> floquet_frechet::Result<()> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut a = CoefficientTower::new(3, 1.0)?;
    a.insert(1, 1, TrigPolynomial::constant(c(0.0, 0.5), 1.0)?)?;
    a.insert(
        2,
        1,
        TrigPolynomial::new(c(0.0, 0.0), vec![(1, c(1.0, 0.0))], vec![], 1.0)?,
    )?;
    a.insert(2, 2, TrigPolynomial::constant(c(-0.3, 0.0), 1.0)?)?;
    a.insert(
        3,
        2,
        TrigPolynomial::new(c(0.1, 0.0), vec![], vec![(2, c(0.5, 0.0))], 1.0)?,
    )?;
    a.insert(3, 3, TrigPolynomial::constant(c(0.2, 0.0), 1.0)?)?;

    let independent = solve_fundamental_levelwise(&a, 2000, 1e-8)?;
    let report = check_projective_consistency(&independent, 1e-10);
    println!(
        "consistency residual {:.3e} (pass: {})",
        report.residual, report.pass
    );

    let single = solve_fundamental(&a, 2000, 1e-8)?;
    println!("Richardson error estimate {:.3e}", single.error_estimate());
    println!("Φ(1) =\n{:.6}", single.sample(3, 2000)?);
    Ok(())
}
