use lsv_core::ensembles::{sample_matrix, sample_rect, Ensemble, SeedSpec};
use lsv_core::linalg::{smallest_singular_value, LuFactor, RealMatrix, RealVector};
use lsv_core::witness::{
    audit, audit_column, compute_ab, construct_witness_vector, dual_projections, independence_probe,
};
use lsv_core::Error;
use proptest::prelude::*;

fn gaussian(n: usize, seed: u64) -> RealMatrix {
    sample_matrix(Ensemble::Gaussian, n, SeedSpec::new(seed, 0)).unwrap()
}

// Solves the small dense system `m c = r` by Gaussian elimination.
fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Vec<f64> {
    let k = r.len();
    for c in 0..k {
        let p = (c..k)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        m.swap(c, p);
        r.swap(c, p);
        for i in c + 1..k {
            let f = m[i][c] / m[c][c];
            for j in c..k {
                m[i][j] -= f * m[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    x
}

fn gram(vs: &[RealVector]) -> Vec<Vec<f64>> {
    vs.iter()
        .map(|a| vs.iter().map(|b| a.dot(b)).collect())
        .collect()
}

fn combine(vs: &[RealVector], coef: &[f64]) -> RealVector {
    let mut out = RealVector::zeros(vs[0].dim());
    for (v, c) in vs.iter().zip(coef) {
        out = out.add(&v.scaled(*c));
    }
    out
}

// Witness from the normal equations of the least-squares fit of X_1 by the
// other columns.
fn oracle_witness(a: &RealMatrix) -> RealVector {
    let cols = a.columns();
    let rest = &cols[1..];
    let rhs = rest.iter().map(|c| c.dot(&cols[0])).collect();
    let coef = solve_dense(gram(rest), rhs);
    cols[0].sub(&combine(rest, &coef))
}

// Dual system of X_2..X_n inside H_1: Y_k* = Σ_j (G⁻¹)_{kj} X_j.
fn oracle_duals(a: &RealMatrix) -> Vec<RealVector> {
    let cols = a.columns();
    let rest = &cols[1..];
    let g = gram(rest);
    (0..rest.len())
        .map(|k| {
            let mut e = vec![0.0; rest.len()];
            e[k] = 1.0;
            combine(rest, &solve_dense(g.clone(), e))
        })
        .collect()
}

#[test]
fn identity_example() {
    let r = audit(&RealMatrix::identity(3)).unwrap();
    assert_eq!(r.x.as_slice(), &[1.0, 0.0, 0.0]);
    assert_eq!(r.norm_x, 1.0);
    assert_eq!(r.ainv_x_norm, 1.0);
    assert_eq!(r.ratio_sum_sq, 0.0);
    assert!((r.s_n - 1.0).abs() < 1e-14);
    assert!((r.implied_bound - 1.0).abs() < 1e-14);
    assert_eq!(r.a, vec![0.0, 0.0]);
    assert_eq!(r.b, vec![1.0, 1.0]);
    assert!(r.is_clean());
    let ys = dual_projections(&RealMatrix::identity(3)).unwrap();
    assert_eq!(ys[0], RealVector::basis(3, 1));
    assert_eq!(ys[1], RealVector::basis(3, 2));
}

#[test]
fn shear_example() {
    let a = RealMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
    let x = construct_witness_vector(&a).unwrap();
    assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] + 0.5).abs() < 1e-15);
    let r = audit(&a).unwrap();
    // A⁻¹x = (1, −1/2), so the bound is (√2/2)/(√5/2) = √(2/5).
    assert!((r.ainv_x_norm - 5f64.sqrt() / 2.0).abs() < 1e-14);
    assert!((r.implied_bound - (2.0f64 / 5.0).sqrt()).abs() < 1e-14);
    assert!((r.s_n - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    assert!(r.s_n <= r.implied_bound);
    assert!(r.is_clean());
}

#[test]
fn witness_matches_normal_equations() {
    for seed in 0..10 {
        let a = gaussian(30, seed);
        let x = construct_witness_vector(&a).unwrap();
        let oracle = oracle_witness(&a);
        assert!(x.sub(&oracle).norm() < 1e-9 * oracle.norm().max(1.0));
        let x1 = a.column(0);
        for k in 1..30 {
            let c = a.column(k);
            assert!(x.dot(&c).abs() <= 1e-9 * x1.norm() * c.norm());
        }
    }
}

#[test]
fn dual_projections_match_gram_oracle() {
    for seed in 0..10 {
        let a = gaussian(20, 100 + seed);
        let ys = dual_projections(&a).unwrap();
        let oracle = oracle_duals(&a);
        for (y, o) in ys.iter().zip(&oracle) {
            assert!(y.sub(o).norm() <= 1e-8 * o.norm());
        }
        // a_k and b_k from the oracle duals: b_k = 1/‖Y_k*‖.
        let (av, bv) = compute_ab(&a).unwrap();
        let x1 = a.column(0);
        for (k, o) in oracle.iter().enumerate() {
            assert!((bv[k] * o.norm() - 1.0).abs() <= 1e-6);
            let ak = (o.dot(&x1) / o.norm()).abs();
            assert!((av[k] - ak).abs() <= 1e-8 * (1.0 + ak));
        }
    }
}

#[test]
fn kernel_and_biorthogonality() {
    for seed in 0..10 {
        let a = gaussian(20, 200 + seed);
        let inv = LuFactor::new(&a).unwrap().inverse();
        let x1_star = inv.row(0);
        let ys = dual_projections(&a).unwrap();
        let r = audit(&a).unwrap();
        assert!(r.checks.kernel_residual <= 1e-9);
        assert!(r.checks.dual_biorthogonality <= 1e-8);
        for (j, y) in ys.iter().enumerate() {
            for k in 1..20 {
                let target = if j + 1 == k { 1.0 } else { 0.0 };
                assert!((y.dot(&a.column(k)) - target).abs() <= 1e-8);
            }
        }
        // ‖x‖ = dist(X_1, H_1) = 1/‖X_1*‖.
        assert!((r.norm_x * x1_star.norm() - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn norm_sum_inequality_both_sides() {
    for seed in 0..10 {
        let a = gaussian(20, 300 + seed);
        let x = oracle_witness(&a);
        let lu = LuFactor::new(&a).unwrap();
        let lhs = lu.solve(&x).unwrap().norm().powi(2);
        let x1 = a.column(0);
        let rhs: f64 = oracle_duals(&a)
            .iter()
            .map(|y| {
                let ak = (y.dot(&x1) / y.norm()).abs();
                let bk = 1.0 / y.norm();
                (ak / bk).powi(2)
            })
            .sum();
        assert!(lhs >= rhs - 1e-8 * (1.0 + rhs), "{lhs} < {rhs}");
    }
}

#[test]
fn implied_bound_against_direct_singular_value() {
    for seed in 0..10 {
        let a = gaussian(25, 400 + seed);
        let r = audit(&a).unwrap();
        let s = smallest_singular_value(&a).unwrap();
        assert!((r.s_n - s).abs() <= 1e-12 * s.max(1.0));
        let x = oracle_witness(&a);
        let ainv_x = LuFactor::new(&a).unwrap().solve(&x).unwrap();
        assert!(s <= x.norm() / ainv_x.norm() * (1.0 + 1e-8));
    }
}

#[test]
fn bulk_gaussian_50() {
    let mut failures = Vec::new();
    for t in 0..500 {
        let a = gaussian(50, 10_000 + t);
        let r = audit(&a).unwrap();
        if !r.is_clean() {
            failures.push((t, r.violations));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn column_three_distinguished() {
    let a = gaussian(12, 77);
    let r = audit_column(&a, 2).unwrap();
    assert!(r.is_clean());
    assert_eq!(r.distinguished_column, 3);
    assert_eq!(r.columns, vec![2, 1, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
    // Permutation covariance: same as moving column 3 to the front by hand.
    let mut m = a.clone();
    m.swap_columns(0, 2);
    let direct = audit(&m).unwrap();
    assert_eq!(r.x, direct.x);
    assert_eq!(r.a, direct.a);
    assert_eq!(r.b, direct.b);
    let inv = LuFactor::new(&a).unwrap().inverse();
    assert!((r.norm_x * inv.row(2).norm() - 1.0).abs() < 1e-9);
    assert!(matches!(audit_column(&a, 12), Err(Error::InvalidQuery(_))));
}

#[test]
fn singular_input_is_reported() {
    let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
    assert!(matches!(audit(&a), Err(Error::SingularMatrix { .. })));
    assert!(matches!(
        construct_witness_vector(&a),
        Err(Error::SingularMatrix { .. })
    ));
}

#[test]
fn independence_examples() {
    let fixed = sample_rect(Ensemble::Gaussian, 5, 4, SeedSpec::new(1, 0)).columns();
    let r = independence_probe(&fixed, Ensemble::Gaussian, 20, SeedSpec::new(1, 1)).unwrap();
    assert_eq!(r.evaluated, 20);
    assert!(r.max_deviation <= 1e-9 && r.passed);

    let fixed = sample_rect(Ensemble::Gaussian, 2, 1, SeedSpec::new(2, 0)).columns();
    let r = independence_probe(&fixed, Ensemble::Gaussian, 10, SeedSpec::new(2, 1)).unwrap();
    assert!(r.passed);

    let fixed = sample_rect(Ensemble::Uniform, 6, 5, SeedSpec::new(3, 0)).columns();
    let r = independence_probe(&fixed, Ensemble::Uniform, 1, SeedSpec::new(3, 1)).unwrap();
    assert_eq!(r.max_deviation, 0.0);
    assert!(r.passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn audits_are_clean(seed in any::<u64>(), n in 2usize..16, kind in 0usize..4) {
        let kind = Ensemble::ALL[kind];
        let a = sample_matrix(kind, n, SeedSpec::new(seed, 0)).unwrap();
        match audit(&a) {
            Ok(r) => prop_assert!(r.is_clean(), "{:?}", r.violations),
            Err(Error::SingularMatrix { .. }) | Err(Error::DegenerateGeometry(_)) => {
                prop_assume!(kind == Ensemble::Rademacher);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn any_column_can_be_distinguished(seed in any::<u64>(), n in 2usize..10, c in 0usize..10) {
        let c = c % n;
        let a = gaussian(n, seed);
        let r = audit_column(&a, c).unwrap();
        prop_assert!(r.is_clean());
        prop_assert_eq!(r.distinguished_column, c + 1);
    }

    #[test]
    fn duals_ignore_first_column(seed in any::<u64>(), n in 3usize..12) {
        let fixed = sample_rect(Ensemble::Gaussian, n, n - 1, SeedSpec::new(seed, 0)).columns();
        let r = independence_probe(&fixed, Ensemble::Gaussian, 5, SeedSpec::new(seed, 1)).unwrap();
        prop_assert!(r.passed, "{}", r.max_deviation);
    }
}
