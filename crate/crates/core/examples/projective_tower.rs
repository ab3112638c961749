//! Truncations, seminorms and the block test for projective maps.

use floquet_frechet::tower::{is_projective_map, seminorm};
use floquet_frechet::{Complex64, NestedMatrix, Tower};
use ndarray::array;

fn main() -> floquet_frechet::Result<()> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let tower = Tower::new(3)?;
    let x = vec![c(1.0), c(-4.0), c(2.0)];
    for i in 1..=3 {
        println!(
            "ρ_3,{i}(x) = {:?}  p_{i}(x) = {}",
            tower.project(&x, i)?,
            seminorm(&x, i)?
        );
    }

    let lower = array![[c(1.0), c(0.0)], [c(2.0), c(3.0)]];
    let upper = array![[c(1.0), c(5.0)], [c(0.0), c(3.0)]];
    println!(
        "lower triangular is projective: {}",
        is_projective_map(&lower, 1e-12)?
    );
    println!(
        "upper entry is projective:      {}",
        is_projective_map(&upper, 1e-12)?
    );

    let m = NestedMatrix::from_lower(lower)?;
    println!("level 1 of M: {}", m.level(1)?);
    println!("λ_2 = {}, μ_1 = {:?}", m.lambda(2)?, m.mu(1)?);
    Ok(())
}
