use mpckit::linalg::{min_symmetric_eigenvalue, spectral_radius};
use mpckit::mpc::DiscreteLtiSystem;
use mpckit::riccati::{lqr_gain, riccati_update, solve_dare, CostWeights};
use nalgebra::{dmatrix, DMatrix};
use proptest::prelude::*;

/// Positive root of `p = q + a²p − (abp)²/(b²p + r)` by bisection.
fn scalar_dare(a: f64, b: f64, q: f64, r: f64) -> f64 {
    let g = |p: f64| q + a * a * p - (a * b * p).powi(2) / (b * b * p + r) - p;
    let (mut lo, mut hi) = (q, q.max(1.0) * 1e6);
    assert!(g(lo) >= 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn example_weights() -> CostWeights {
    CostWeights::new(DMatrix::identity(2, 2), dmatrix![1.0]).unwrap()
}

#[test]
fn scalar_system_matches_bisection() {
    for (a, b, q, r) in [
        (0.5, 1.0, 1.0, 1.0),
        (1.2, 0.7, 2.0, 0.5),
        (-0.9, 2.0, 0.3, 4.0),
    ] {
        let sys = DiscreteLtiSystem::new(dmatrix![a], dmatrix![b]).unwrap();
        let w = CostWeights::new(dmatrix![q], dmatrix![r]).unwrap();
        let t = solve_dare(&sys, &w).unwrap();
        let p = scalar_dare(a, b, q, r);
        assert!(
            (t.qf[(0, 0)] - p).abs() <= 1e-9 * p.max(1.0),
            "{} vs {p}",
            t.qf[(0, 0)]
        );
        let k = a * b * p / (b * b * p + r);
        assert!((t.k[(0, 0)] - k).abs() <= 1e-9);
    }
}

#[test]
fn terminal_weight_dominates_stage_weight() {
    let sys = DiscreteLtiSystem::double_integrator(0.05);
    let w = example_weights();
    let t = solve_dare(&sys, &w).unwrap();
    assert!(min_symmetric_eigenvalue(&(&t.qf - w.q())) >= -1e-9);
    assert!(t.qf.clone().cholesky().is_some());
}

#[test]
fn value_iteration_is_monotone() {
    let sys = DiscreteLtiSystem::double_integrator(0.05);
    let w = example_weights();
    let mut p = w.q().clone();
    let mut steps = Vec::new();
    for _ in 0..200 {
        let next = riccati_update(&sys, &w, &p).unwrap();
        assert!(min_symmetric_eigenvalue(&(&next - &p)) >= -1e-9);
        steps.push((&next - &p).norm());
        p = next;
    }
    // The step size peaks around iteration 13 on this system and contracts
    // from then on.
    for k in 20..steps.len() - 1 {
        assert!(steps[k + 1] <= steps[k] * (1.0 + 1e-12), "step {k}");
    }
}

#[test]
fn returned_gain_is_the_lqr_gain_of_the_returned_weight() {
    let sys = DiscreteLtiSystem::double_integrator(0.05);
    let w = example_weights();
    let t = solve_dare(&sys, &w).unwrap();
    let k = lqr_gain(&sys, &t.qf, &w).unwrap();
    assert!((k - &t.k).amax() < 1e-12);
    assert!((spectral_radius(&t.closed_loop(&sys)) - t.closed_loop_spectral_radius).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_controllable_systems_give_certified_solutions(
        a in prop::collection::vec(-1.2f64..1.2, 4),
        b in prop::collection::vec(-1.0f64..1.0, 2),
        qd in prop::collection::vec(0.1f64..5.0, 2),
        r in 0.1f64..5.0,
    ) {
        let am = DMatrix::from_row_slice(2, 2, &a);
        let bm = DMatrix::from_row_slice(2, 1, &b);
        // Keep well-conditioned controllable pairs only.
        let ctrb = DMatrix::from_columns(&[bm.column(0).into_owned(), (&am * &bm).column(0).into_owned()]);
        prop_assume!(ctrb.determinant().abs() > 0.05);
        let sys = DiscreteLtiSystem::new(am, bm).unwrap();
        let w = CostWeights::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(qd)), dmatrix![r]).unwrap();
        let t = solve_dare(&sys, &w).unwrap();
        prop_assert!(t.residual <= 1e-9 * t.qf.amax().max(1.0));
        prop_assert!(t.closed_loop_spectral_radius < 1.0);
        prop_assert!((&t.qf - t.qf.transpose()).amax() <= 1e-9);
        prop_assert!(min_symmetric_eigenvalue(&(&t.qf - w.q())) >= -1e-9 * t.qf.amax());
    }
}
