//! Logarithm of a nested matrix, built level by level so that every
//! truncation is the logarithm of the corresponding truncation.

use floquet_frechet::linalg::{compatible_log_detailed, exp_tower};
use floquet_frechet::{Complex64, InvertibleNestedMatrix, LogBranch, NestedMatrix};
use ndarray::array;

fn main() -> floquet_frechet::Result<()> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let m = NestedMatrix::from_lower(array![
        [c(2.0), c(0.0), c(0.0)],
        [c(3.0), c(4.0), c(0.0)],
        [c(1.0), c(-1.0), Complex64::new(0.0, 1.0)],
    ])?;
    let m = InvertibleNestedMatrix::new(m)?;

    let log = compatible_log_detailed(&m, &LogBranch::principal(), 1e-10)?;
    println!("log tower:\n{:.6}", log.tower.top());
    println!("level residuals {:?}", log.level_residuals);
    println!("min |γ| {:.3e}", log.min_gamma_modulus());
    println!(
        "B_2 lower-left {:.6} (3 ln 2 / 2 = {:.6})",
        log.tower.top()[[1, 0]].re,
        1.5 * 2f64.ln()
    );

    // Another branch: wind the third eigenvalue once around the origin.
    let branch = LogBranch::principal().with_winding(3, 1)?;
    let wound = compatible_log_detailed(&m, &branch, 1e-10)?;
    println!("wound diagonal {:.6}", wound.tower.top()[[2, 2]]);
    let back = exp_tower(&wound.tower, 1e-15)?;
    println!(
        "exp(wound) recovers M: {}",
        floquet_frechet::tower::max_entry_diff(back.top(), m.top()) < 1e-10
    );
    Ok(())
}
