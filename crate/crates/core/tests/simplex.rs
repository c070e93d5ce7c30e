mod common;

use std::f64::consts::E;

use meinfer::simplex::{build_grid_with_budget, GaussSimplexRule, StickBreaking};
use meinfer::{build_grid, expect_grid, expect_mc, SimplexError, ThetaPoint};
use proptest::prelude::*;

use common::{dirichlet_moment, rng};
use rand::Rng;

type P = ThetaPoint<f64>;

#[test]
fn grid_sizes() {
    let g = build_grid::<f64>(3, 2).unwrap();
    assert_eq!(g.len(), 6);
    assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert_eq!(build_grid::<f64>(2, 4).unwrap().len(), 5);
    let g = build_grid::<f64>(3, 240).unwrap();
    assert_eq!(g.len(), 29161);
    assert!((expect_grid(|_: &P| 1.0, &g).unwrap() - 1.0).abs() <= 2.0 * f64::EPSILON);
}

#[test]
fn grid_nodes_stay_inside() {
    let g = build_grid::<f64>(4, 12).unwrap();
    for t in g.nodes() {
        assert!(t.as_slice().iter().all(|&x| x > 0.0));
        assert!((t.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn budget_is_enforced() {
    match build_grid::<f64>(8, 60) {
        Err(SimplexError::BudgetExceeded { nodes, .. }) => assert!(nodes > 1_000_000),
        other => panic!("expected budget error, got {other:?}"),
    }
    assert!(build_grid_with_budget::<f64>(3, 10, 10).is_err());
    assert!(build_grid::<f64>(1, 10).is_err());
    assert!(build_grid::<f64>(3, 0).is_err());
}

#[test]
fn grid_weights_match_cell_volumes() {
    let r = 17;
    let lib = build_grid::<f64>(3, r).unwrap();
    let oracle = common::Lattice3::cell_volume(r);
    assert_eq!(lib.len(), oracle.nodes.len());
    for (t, w) in lib.iter() {
        let j = oracle
            .nodes
            .iter()
            .position(|o| {
                o.iter()
                    .zip(t.as_slice())
                    .all(|(a, b)| (a - b).abs() < 1e-14)
            })
            .expect("node present in oracle lattice");
        assert!((w - oracle.weights[j]).abs() < 1e-15, "{t:?}");
    }
}

#[test]
fn grid_examples() {
    let g = build_grid::<f64>(3, 240).unwrap();
    let m1 = expect_grid(|t: &P| t[0], &g).unwrap();
    assert!((m1 - 1.0 / 3.0).abs() < 1e-6);
    // θ₁ ~ Beta(1, 2): ∫ eᵗ·2(1−t) dt = 2(e − 2).
    let oracle = 2.0 * (E - 2.0);
    let v = expect_grid(|t: &P| t[0].exp(), &g).unwrap();
    assert!((v - oracle).abs() < 1e-5, "{v} vs {oracle}");
}

#[test]
fn grid_converges_on_monomials() {
    let alpha = [1.0; 3];
    let monomials: [[u32; 3]; 5] = [[2, 0, 0], [1, 1, 0], [2, 1, 0], [1, 1, 1], [3, 2, 1]];
    for p in monomials {
        let oracle = dirichlet_moment(&alpha, &p);
        let mut last = f64::INFINITY;
        for r in [30, 60, 120, 240] {
            let g = build_grid::<f64>(3, r).unwrap();
            let v = expect_grid(
                |t: &P| t[0].powi(p[0] as i32) * t[1].powi(p[1] as i32) * t[2].powi(p[2] as i32),
                &g,
            )
            .unwrap();
            let err = (v - oracle).abs();
            assert!(err <= last, "{p:?} r={r}: {err} > {last}");
            last = err;
        }
        assert!(last / oracle < 1e-3, "{p:?}: {last}");
    }
}

#[test]
fn grid_is_second_order() {
    let g = |t: &P| t[0].exp();
    let oracle = 2.0 * (E - 2.0);
    let e60 = (expect_grid(g, &build_grid::<f64>(3, 60).unwrap()).unwrap() - oracle).abs();
    let e120 = (expect_grid(g, &build_grid::<f64>(3, 120).unwrap()).unwrap() - oracle).abs();
    let ratio = e60 / e120;
    assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
}

#[test]
fn grid_reports_bad_node() {
    let g = build_grid::<f64>(3, 10).unwrap();
    match expect_grid(|t: &P| if t[0] > 0.9 { f64::NAN } else { 1.0 }, &g) {
        Err(SimplexError::NonFiniteNode { point, .. }) => assert!(point[0] > 0.9),
        other => panic!("expected node error, got {other:?}"),
    }
}

#[test]
fn grid_in_f32() {
    let g = build_grid::<f32>(3, 60).unwrap();
    let v = expect_grid(|t: &ThetaPoint<f32>| t[0], &g).unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-5);
}

#[test]
fn mc_examples() {
    let one = expect_mc(|_: &P| 1.0, &[2.0, 3.0, 0.5], 1000, 5).unwrap();
    assert_eq!(one.value, 1.0);
    assert_eq!(one.std_error, 0.0);
    let m = expect_mc(|t: &P| t[0], &[1.0; 3], 200_000, 11).unwrap();
    assert!((m.value - 1.0 / 3.0).abs() < 3.0 * m.std_error);
    let e = expect_mc(|t: &P| t[0].exp(), &[1.0; 3], 200_000, 12).unwrap();
    let grid = expect_grid(|t: &P| t[0].exp(), &build_grid(3, 240).unwrap()).unwrap();
    assert!(
        (e.value - grid).abs() < 3.0 * e.std_error,
        "{} vs {grid}",
        e.value
    );
}

#[test]
fn mc_is_reproducible() {
    let a = expect_mc(|t: &P| t[1] * t[2], &[1.5, 2.0, 0.7], 50_000, 3).unwrap();
    let b = expect_mc(|t: &P| t[1] * t[2], &[1.5, 2.0, 0.7], 50_000, 3).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let c = expect_mc(|t: &P| t[1] * t[2], &[1.5, 2.0, 0.7], 50_000, 4).unwrap();
    assert_ne!(a.value, c.value);
}

#[test]
fn mc_rejects_bad_input() {
    assert!(matches!(
        expect_mc(|_: &P| 1.0, &[1.0, 1.0], 1, 0),
        Err(SimplexError::TooFewSamples(1))
    ));
    assert!(matches!(
        expect_mc(|_: &P| 1.0, &[1.0, 0.0], 10, 0),
        Err(SimplexError::BadParameter { index: 1, .. })
    ));
}

#[test]
fn mc_matches_dirichlet_moments() {
    let alpha = [2.0, 0.5, 3.5, 1.0];
    let est = expect_mc(|t: &P| t[0] * t[2] * t[2], &alpha, 200_000, 21).unwrap();
    let oracle = dirichlet_moment(&alpha, &[1, 0, 2, 0]);
    assert!((est.value - oracle).abs() < 4.0 * est.std_error);
}

#[test]
fn mc_and_grid_agree_on_random_polynomials() {
    let mut r = rng(77);
    let grid = build_grid::<f64>(3, 240).unwrap();
    for case in 0..10 {
        let coef: Vec<f64> = (0..4).map(|_| r.random_range(-2.0..2.0)).collect();
        let pw: Vec<i32> = (0..3).map(|_| r.random_range(0..4)).collect();
        let g = |t: &P| {
            coef[0]
                + coef[1] * t[0].powi(pw[0])
                + coef[2] * t[1].powi(pw[1]) * t[2]
                + coef[3] * t[2].powi(pw[2])
        };
        let est = expect_mc(g, &[1.0; 3], 200_000, 1000 + case).unwrap();
        let exact = expect_grid(g, &grid).unwrap();
        assert!(
            (est.value - exact).abs() <= 4.0 * est.std_error,
            "case {case}: {} vs {exact} (se {})",
            est.value,
            est.std_error
        );
    }
}

#[test]
fn gauss_rule_integrates_dirichlet_moments() {
    let alpha = [3.0, 1.5, 2.0];
    let measure = StickBreaking::dirichlet(&alpha).unwrap();
    let rule = GaussSimplexRule::<f64>::new(&measure, 12, 1_000_000).unwrap();
    let total: f64 = rule.weights().iter().sum();
    assert!((total - 1.0).abs() < 1e-13);
    for p in [[1u32, 0, 0], [2, 3, 1], [0, 4, 4]] {
        let v: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(t, w)| {
                w * t[0].powi(p[0] as i32) * t[1].powi(p[1] as i32) * t[2].powi(p[2] as i32)
            })
            .sum();
        let oracle = dirichlet_moment(&alpha, &p);
        assert!(
            (v - oracle).abs() < 1e-13 * oracle.max(1e-3),
            "{p:?}: {v} vs {oracle}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn weights_sum_to_one(k in 2usize..=6, r in 1usize..=60) {
        let count = (1..k).fold(1u128, |acc, i| acc * (r + i) as u128 / i as u128);
        prop_assume!(count <= 1_000_000);
        let g = build_grid::<f64>(k, r).unwrap();
        prop_assert_eq!(g.len() as u128, count);
        let total = expect_grid(|_: &P| 1.0, &g).unwrap();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn components_are_symmetric(k in 2usize..=5, r in 1usize..=30) {
        let g = build_grid::<f64>(k, r).unwrap();
        let first = expect_grid(|t: &P| t[0], &g).unwrap();
        let sq = expect_grid(|t: &P| t[0] * t[0], &g).unwrap();
        for i in 1..k {
            let v = expect_grid(|t: &P| t[i], &g).unwrap();
            prop_assert!((v - first).abs() <= 1e-14 * first);
            let v = expect_grid(|t: &P| t[i] * t[i], &g).unwrap();
            prop_assert!((v - sq).abs() <= 1e-14 * sq);
        }
        // Linear functions are integrated exactly.
        prop_assert!((first - 1.0 / k as f64).abs() <= 1e-14);
    }

    #[test]
    fn expectation_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, r in 5usize..40) {
        let g = build_grid::<f64>(3, r).unwrap();
        let f = |t: &P| (t[0] * 3.0).sin() + t[1];
        let h = |t: &P| t[2].ln() * t[0];
        let lhs = expect_grid(|t: &P| a * f(t) + b * h(t), &g).unwrap();
        let rhs = a * expect_grid(f, &g).unwrap() + b * expect_grid(h, &g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn grid_is_deterministic(k in 2usize..=4, r in 1usize..=20) {
        let a = build_grid::<f64>(k, r).unwrap();
        let b = build_grid::<f64>(k, r).unwrap();
        prop_assert_eq!(a.nodes(), b.nodes());
        prop_assert_eq!(a.weights(), b.weights());
    }
}
