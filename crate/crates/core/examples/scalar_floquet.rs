//! Scalar reduction of x' = (1 + sin 2πt) x.
//!
//! The monodromy is e, the constant coefficient is B = 1 and the periodic
//! factor is Q(t) = exp(-(1 - cos 2πt) / 2π).

use floquet_frechet::floquet::floquet_reduce;
use floquet_frechet::ode::{solve_fundamental, TrigPolynomial};
use floquet_frechet::{CoefficientTower, Complex64, LogBranch};

fn main() -> floquet_frechet::Result<()> {
    let a_t = TrigPolynomial::new(
        Complex64::new(1.0, 0.0),
        vec![],
        vec![(1, Complex64::new(1.0, 0.0))],
        1.0,
    )?;
    let a = CoefficientTower::new(1, 1.0)?.with_entry(1, 1, a_t)?;
    let sol = solve_fundamental(&a, 2000, 1e-8)?;
    let result = floquet_reduce(&sol, &LogBranch::principal(), 1e-8)?;

    println!("monodromy  {:.12}", result.monodromy.m.top()[[0, 0]].re);
    println!("B          {:.12}", result.b()[[0, 0]].re);
    for s in (0..=2000).step_by(250) {
        let t = result.times[s];
        let exact =
            (-(1.0 - (2.0 * std::f64::consts::PI * t).cos()) / (2.0 * std::f64::consts::PI)).exp();
        println!(
            "Q({t:.3}) = {:.12}  exact {exact:.12}",
            result.q(1, s)?[[0, 0]].re
        );
    }
    Ok(())
}
