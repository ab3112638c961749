mod common;

use common::{c, max_diff, random_coefficient, random_lower, rng, scalar_coefficient, two_level};
use floquet_frechet::floquet::{
    check_extension, check_monodromy_homomorphism, check_q_periodicity, floquet_reduce, monodromy,
    FloquetResult, MonodromyTower, Residuals,
};
use floquet_frechet::linalg::{compatible_log, compatible_log_detailed, lower_inverse, matrix_exp};
use floquet_frechet::ode::{
    integrate_fundamental, solve_fundamental, solve_fundamental_levelwise, TrigPolynomial,
};
use floquet_frechet::{
    Array2, CoefficientTower, Complex64, InvertibleNestedMatrix, LogBranch, NestedMatrix,
};
use ndarray::{array, s};
use std::f64::consts::PI;

fn constant_coefficient(m: &Array2<Complex64>) -> CoefficientTower {
    let n = m.nrows();
    let mut a = CoefficientTower::new(n, 1.0).unwrap();
    for r in 0..n {
        for col in 0..=r {
            a.insert(
                r + 1,
                col + 1,
                TrigPolynomial::constant(m[[r, col]], 1.0).unwrap(),
            )
            .unwrap();
        }
    }
    a
}

fn assert_cycle(result: &FloquetResult) {
    let r = &result.residuals;
    assert!(r.exp_log <= 1e-8, "exp-log {:e}", r.exp_log);
    assert!(r.periodicity <= 1e-7, "periodicity {:e}", r.periodicity);
    assert!(r.constancy <= 1e-5, "constancy {:e}", r.constancy);
    assert!(r.extension <= 1e-8, "extension {:e}", r.extension);
    assert!(r.connection <= 1e-6, "connection {:e}", r.connection);
}

#[test]
fn reduction_cycle_on_test_family() {
    let mut rng = rng(51);
    let mut systems = vec![scalar_coefficient(1.0, 1.0), two_level(0.3)];
    systems.push(random_coefficient(&mut rng, 3, 2, 0.8));
    for a in &systems {
        let sol = solve_fundamental_levelwise(a, 2000, 1e-8).unwrap();
        let result = floquet_reduce(&sol, &LogBranch::principal(), 1e-8).unwrap();
        assert_cycle(&result);
        assert_eq!(result.q_samples[0], NestedMatrix::identity(a.depth()));
    }
}

#[test]
fn cocycle_shift_leaves_q_unchanged() {
    let mut rng = rng(52);
    let a = random_coefficient(&mut rng, 3, 2, 0.8);
    let sol = solve_fundamental(&a, 2000, 1e-8).unwrap();
    let result = floquet_reduce(&sol, &LogBranch::principal(), 1e-8).unwrap();
    for s in (0..=2000).step_by(125) {
        let t = sol.times()[s];
        for periods in -2i64..=2 {
            let flow = matrix_exp(&result.b().mapv(|z| z * (t + periods as f64)), 1e-15).unwrap();
            let phi_inv = lower_inverse(&sol.sample_shifted(s, periods).unwrap()).unwrap();
            let q_shifted = flow.dot(&phi_inv);
            let q = result.q(3, s).unwrap();
            assert!(max_diff(&q_shifted, &q) <= 1e-8, "s={s} m={periods}");
        }
    }
}

#[test]
fn monodromy_is_a_homomorphism() {
    let mut rng = rng(53);
    let a = random_coefficient(&mut rng, 4, 2, 0.6);
    let sol = solve_fundamental(&a, 2000, 1e-8).unwrap();
    let mono = monodromy(&sol).unwrap();
    let check = check_monodromy_homomorphism(&mono, 3, 1e-9).unwrap();
    assert!(check.pass, "residual {:e}", check.residual);
}

#[test]
fn reduction_commutes_with_truncation() {
    let mut rng = rng(54);
    let a = random_coefficient(&mut rng, 4, 2, 0.8);
    let sol = solve_fundamental(&a, 2000, 1e-8).unwrap();
    let full = floquet_reduce(&sol, &LogBranch::principal(), 1e-8).unwrap();
    for level in 1..4 {
        let m_level = full.monodromy.m.truncate(level).unwrap();
        let b_level = compatible_log(&m_level, &LogBranch::principal(), 1e-8).unwrap();
        let b_full = full.b().slice(s![..level, ..level]).to_owned();
        assert!(max_diff(b_level.top(), &b_full) <= 1e-12);
        for s in (0..=2000).step_by(200) {
            let phi = sol.sample(level, s).unwrap();
            let q = matrix_exp(&b_level.top().mapv(|z| z * sol.times()[s]), 1e-15)
                .unwrap()
                .dot(&lower_inverse(&phi).unwrap());
            assert!(max_diff(&q, &full.q(level, s).unwrap()) <= 1e-10);
        }
    }
}

#[test]
fn winding_changes_b_but_keeps_q_periodic() {
    let mut a = CoefficientTower::new(2, 1.0).unwrap();
    a.insert(1, 1, TrigPolynomial::constant(c(0.3), 1.0).unwrap())
        .unwrap();
    a.insert(
        2,
        2,
        TrigPolynomial::new(c(-0.2), vec![], vec![(1, c(0.5))], 1.0).unwrap(),
    )
    .unwrap();
    a.insert(
        2,
        1,
        TrigPolynomial::new(c(0.1), vec![(1, c(1.0))], vec![], 1.0).unwrap(),
    )
    .unwrap();
    let sol = solve_fundamental(&a, 2000, 1e-8).unwrap();
    let base = floquet_reduce(&sol, &LogBranch::principal(), 1e-8).unwrap();
    let branch = LogBranch::principal().with_winding(1, 1).unwrap();
    let shifted = match floquet_reduce(&sol, &branch, 1e-8) {
        Ok(r) => r,
        Err(e) => panic!("winding +1: {e}"),
    };
    let delta = shifted.b()[[0, 0]] - base.b()[[0, 0]];
    assert!((delta - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    assert!(check_q_periodicity(&shifted, 1e-7).pass);
    assert!(shifted.residuals.exp_log <= 1e-8);
    assert!(shifted.residuals.extension <= 1e-8);
}

#[test]
fn winding_on_repeated_eigenvalue_is_a_conditioning_error() {
    let sol = solve_fundamental(&two_level(0.3), 2000, 1e-8).unwrap();
    let branch = LogBranch::principal().with_winding(1, 1).unwrap();
    assert!(matches!(
        floquet_reduce(&sol, &branch, 1e-8),
        Err(floquet_frechet::Error::Conditioning(_))
    ));
    // Winding both levels together keeps the logs on one sheet.
    let both = LogBranch::principal()
        .with_winding(1, 1)
        .unwrap()
        .with_winding(2, 1)
        .unwrap();
    let result = floquet_reduce(&sol, &both, 1e-8).unwrap();
    assert!(result.residuals.exp_log <= 1e-8);
}

#[test]
fn constant_coefficient_gives_identity_q() {
    let mut rng = rng(55);
    let mut cmat = random_lower(&mut rng, 3, 0.4);
    for k in 0..3 {
        cmat[[k, k]] = c(0.3 * k as f64 - 0.2);
    }
    let sol = solve_fundamental_levelwise(&constant_coefficient(&cmat), 2000, 1e-10).unwrap();
    let result = floquet_reduce(&sol, &LogBranch::principal(), 1e-10).unwrap();
    assert!(max_diff(result.b(), &cmat) <= 1e-10);
    for q in &result.q_samples {
        assert!(max_diff(q.top(), &Array2::eye(3)) <= 1e-10);
    }
    let r = &result.residuals;
    for value in [r.consistency, r.periodicity, r.exp_log, r.extension] {
        assert!(value <= 1e-10, "{r:?}");
    }
}

#[test]
fn monodromy_entry_matches_fine_reference() {
    let mut rng = rng(56);
    let a = random_coefficient(&mut rng, 2, 2, 1.0);
    let sol = solve_fundamental(&a, 2000, 1e-8).unwrap();
    let reference = integrate_fundamental(&a, 100_000).unwrap().pop().unwrap();
    let m = monodromy(&sol).unwrap();
    assert!((m.m.top()[[1, 0]] - reference[[1, 0]]).norm() <= 1e-9);
    assert!(max_diff(m.m.top(), &reference) <= 1e-9);
}

#[test]
fn extension_of_worked_log() {
    let m = array![[c(2.0), c(0.0)], [c(3.0), c(4.0)]];
    let m = InvertibleNestedMatrix::new(NestedMatrix::from_lower(m).unwrap()).unwrap();
    let log = compatible_log_detailed(&m, &LogBranch::principal(), 1e-10).unwrap();
    let mono = MonodromyTower {
        m,
        period: 1.0,
        period_normalized: true,
    };
    let result = FloquetResult {
        monodromy: mono.clone(),
        bbar: log.tower.clone(),
        log,
        times: vec![0.0, 1.0],
        q_samples: vec![NestedMatrix::identity(2); 2],
        residuals: Residuals::default(),
    };
    let check = check_extension(&result, &mono, 2, 1e-8).unwrap();
    assert!(check.pass, "residual {:e}", check.residual);
    let f2 = result.flow(2.0).unwrap();
    let expected = array![[c(4.0), c(0.0)], [c(18.0), c(16.0)]];
    assert!(max_diff(f2.top(), &expected) <= 1e-10);
}
