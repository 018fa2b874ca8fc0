mod common;

use std::f64::consts::PI;

use clifford_tori::birkhoff::{reconstruct_unitary, CrossSectionSpec};
use clifford_tori::families::interpolating_family;
use clifford_tori::intersect::{
    count_intersections, find_intersections, residual_norm, scan_cell, Classification, IntersectionCount,
    PhasePoint, SolverConfig,
};
use clifford_tori::matcore::{cis, fourier_matrix, haar_random_unitary, UnitaryMatrix};
use clifford_tori::rng;
use clifford_tori::Error;
use num_complex::Complex64;
use rand::Rng;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn fourier_table_counts() {
    let expect = [
        (2, IntersectionCount::Finite(2)),
        (3, IntersectionCount::Finite(6)),
        (4, IntersectionCount::Continuum),
        (5, IntersectionCount::Finite(20)),
    ];
    for (n, want) in expect {
        let got = count_intersections(&fourier_matrix(n).unwrap(), &cfg()).unwrap();
        assert_eq!(got, want, "N = {n}");
    }
}

#[test]
fn fourier_five_points_are_transversal_and_cancel() {
    let set = find_intersections(&fourier_matrix(5).unwrap(), &cfg()).unwrap();
    assert_eq!(set.classification, Classification::FiniteTransversal);
    assert_eq!(set.index_sum(), 0);
    let (plus, minus) = set.points.iter().fold((0, 0), |(p, m), x| (p + (x.index > 0) as usize, m + (x.index < 0) as usize));
    assert_eq!((plus, minus), (10, 10));
}

#[test]
fn reported_points_are_solutions() {
    for seed in 0..20 {
        let u = haar_random_unitary(3, seed).unwrap();
        let set = find_intersections(&u, &cfg()).unwrap();
        for p in &set.points {
            assert!(residual_norm(&u, &p.alpha) < 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn enphasing_translates_the_solution_set() {
    let mut r = rng::stream(77, 0);
    for seed in 0..10 {
        let u = haar_random_unitary(3, seed).unwrap();
        let left: Vec<f64> = (0..3).map(|_| r.random::<f64>() * 2.0 * PI).collect();
        let right: Vec<f64> = (0..3).map(|_| r.random::<f64>() * 2.0 * PI).collect();
        let d: Vec<Complex64> = left.iter().map(|&t| cis(t)).collect();
        let dp: Vec<Complex64> = right.iter().map(|&t| cis(t)).collect();
        let v = u.enphase(&d, &dp);
        let a = find_intersections(&u, &cfg()).unwrap();
        let b = find_intersections(&v, &cfg()).unwrap();
        // U e^{iα} = D' e^{iβ} up to the overall phase d'_0
        let moved: Vec<PhasePoint> = a
            .points
            .iter()
            .map(|p| PhasePoint::new((1..3).map(|k| p.alpha.as_slice()[k - 1] - (right[k] - right[0])).collect()))
            .collect();
        let found: Vec<PhasePoint> = b.points.iter().map(|p| p.alpha.clone()).collect();
        assert!(common::same_point_set(&moved, &found, 1e-8), "seed {seed}");
        assert_eq!(a.classification, b.classification);
    }
}

#[test]
fn facet_interior_has_four_points() {
    let spec = CrossSectionSpec::facet(0, 0).unwrap();
    for (u, v) in [(0.5, 0.5), (0.3, 0.6), (0.7, 0.2)] {
        let b = spec.point(u, v).unwrap();
        let w = reconstruct_unitary(&b).unwrap();
        let set = find_intersections(&w, &cfg()).unwrap();
        assert_eq!(set.classification, Classification::FiniteTransversal, "({u}, {v})");
        assert_eq!(set.points.len(), 4);
        assert_eq!(set.index_sum(), 0);
    }
    // its short edges are orthostochastic circles
    let edge = reconstruct_unitary(&spec.point(0.0, 0.5).unwrap()).unwrap();
    assert_eq!(count_intersections(&edge, &cfg()).unwrap(), IntersectionCount::Continuum);
}

#[test]
fn family_boundary_has_three_points() {
    let u = interpolating_family(3, PI).unwrap();
    let set = find_intersections(&u, &cfg()).unwrap();
    assert_eq!(set.classification, Classification::FiniteDegenerate);
    assert_eq!(set.count(), IntersectionCount::Finite(3));
}

#[test]
fn identity_and_permutations_coincide() {
    let set = find_intersections(&UnitaryMatrix::identity(3), &cfg()).unwrap();
    assert_eq!(set.classification, Classification::Continuum);
    for w in &set.continuum_witnesses {
        assert!(residual_norm(&UnitaryMatrix::identity(3), w) < 1e-10);
    }
    let p = UnitaryMatrix::permutation(&[2, 0, 1, 3]).unwrap();
    assert_eq!(count_intersections(&p, &cfg()).unwrap(), IntersectionCount::Continuum);
}

#[test]
fn parabolic_section_merges() {
    let spec = CrossSectionSpec::parabolic(0, 1).unwrap();
    let count = |u: f64, v: f64| scan_cell(&spec, u, v, &cfg()).count.unwrap();
    assert_eq!(count(0.0, 0.0), IntersectionCount::Finite(6));
    // a pair merges on one inner boundary, three points on the other
    assert_eq!(count(-1.0 / 6.0, -1.0 / 6.0), IntersectionCount::Finite(5));
    assert_eq!(count(-0.25, 0.25), IntersectionCount::Finite(4));
    assert_eq!(count(-0.2, -0.2), IntersectionCount::Finite(4));
    // the unistochastic edge itself
    assert_eq!(count(0.5, 0.5), IntersectionCount::Continuum);
}

#[test]
fn doubling_starts_never_loses_points() {
    let base = SolverConfig::default().with_starts(100);
    let doubled = SolverConfig::default().with_starts(200);
    for seed in 0..100 {
        let u = haar_random_unitary(3, 1000 + seed).unwrap();
        let a = count_intersections(&u, &base).unwrap();
        let b = count_intersections(&u, &doubled).unwrap();
        assert!(b >= a, "seed {seed}: {a} then {b}");
    }
}

#[test]
fn non_unitary_input_is_an_error() {
    let m = clifford_tori::matcore::CMatrix::identity(3, 3) * Complex64::new(2.0, 0.0);
    let u = UnitaryMatrix::new_unchecked(m);
    assert!(matches!(find_intersections(&u, &cfg()), Err(Error::InvalidMatrix(_))));
}

#[test]
fn budget_exhaustion_is_reported() {
    let tight = SolverConfig { max_rounds: 2, ..SolverConfig::default() };
    let err = find_intersections(&fourier_matrix(3).unwrap(), &tight).unwrap_err();
    match err {
        Error::NonConverged { rounds, history } => {
            assert_eq!(rounds, 2);
            assert_eq!(history.len(), 2);
        }
        other => panic!("unexpected {other:?}"),
    }
}
