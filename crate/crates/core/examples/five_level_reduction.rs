//! Full reduction of a five-level trig-polynomial system with every residual.

use floquet_frechet::floquet::{check_monodromy_homomorphism, floquet_reduce};
use floquet_frechet::ode::{solve_fundamental_levelwise, TrigPolynomial};
use floquet_frechet::{CoefficientTower, Complex64, LogBranch};

fn main() -> floquet_frechet::Result<()> {
    let n = 5;
    let mut a = CoefficientTower::new(n, 1.0)?;
    for r in 1..=n {
        for col in 1..=r {
            // Deterministic pseudo-random coefficients.
            let seed = (7 * r + 3 * col) as f64;
            let z = |k: f64| Complex64::from_polar(0.3 + 0.2 * (seed * k).sin().abs(), seed * k);
            let poly = TrigPolynomial::new(
                z(1.0),
                vec![(1 + (r + col) as u32 % 3, z(2.0))],
                vec![(1 + (r * col) as u32 % 3, z(3.0))],
                1.0,
            )?;
            a.insert(r, col, poly)?;
        }
    }

    let sol = solve_fundamental_levelwise(&a, 4000, 1e-8)?;
    let result = floquet_reduce(&sol, &LogBranch::principal(), 1e-8)?;
    let r = &result.residuals;
    println!("consistency  {:.3e}", r.consistency);
    println!("exp-log      {:.3e}", r.exp_log);
    println!("periodicity  {:.3e}", r.periodicity);
    println!("constancy    {:.3e}", r.constancy);
    println!("extension    {:.3e}", r.extension);
    println!("connection   {:.3e}", r.connection);
    let hom = check_monodromy_homomorphism(&result.monodromy, 3, 1e-9)?;
    println!("homomorphism {:.3e}", hom.residual);
    println!("B diagonal   {:.6?}", result.bbar.diagonal());
    Ok(())
}
