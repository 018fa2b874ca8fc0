use std::f64::consts::PI;

use clifford_tori::birkhoff::{
    is_unistochastic, permutation_decomposition, reconstruct_unitary, sample_birkhoff, BistochasticMatrix,
};
use clifford_tori::intersect::{find_intersections, residual, residual_jacobian, Classification, PhasePoint, SolverConfig};
use clifford_tori::matcore::{cis, dephase, haar_random_unitary, unistochastic_projection};
use proptest::prelude::*;
use rayon::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_central_differences(
        seed in 0u64..10_000,
        n in 2usize..6,
        raw in proptest::collection::vec(0.0..2.0 * PI, 5),
    ) {
        let u = haar_random_unitary(n, seed).unwrap();
        let alpha = PhasePoint::new(raw[..n - 1].to_vec());
        let jac = residual_jacobian(&u, &alpha);
        let h = 1e-6;
        for r in 0..n - 1 {
            let shift = |d: f64| {
                let mut a = alpha.as_slice().to_vec();
                a[r] += d;
                residual(&u, &PhasePoint::new(a))
            };
            let (fp, fm) = (shift(h), shift(-h));
            for j in 0..n {
                let fd = (fp[j] - fm[j]) / (2.0 * h);
                prop_assert!((fd - jac[(j, r)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn projection_ignores_enphasing(seed in 0u64..10_000, phases in proptest::collection::vec(0.0..2.0 * PI, 8)) {
        let u = haar_random_unitary(4, seed).unwrap();
        let d: Vec<_> = phases[..4].iter().map(|&t| cis(t)).collect();
        let e: Vec<_> = phases[4..].iter().map(|&t| cis(t)).collect();
        let a = unistochastic_projection(&u);
        let b = unistochastic_projection(&u.enphase(&d, &e));
        prop_assert!((a.entries() - b.entries()).amax() < 1e-15);
    }

    #[test]
    fn dephasing_is_idempotent(seed in 0u64..10_000, n in 2usize..6) {
        let u = haar_random_unitary(n, seed).unwrap();
        let once = dephase(&u).unwrap();
        let twice = dephase(&once).unwrap();
        prop_assert!((once.matrix() - twice.matrix()).camax() < 1e-13);
    }

    #[test]
    fn decomposition_round_trips(seed in 0u64..100_000) {
        let b = sample_birkhoff(seed);
        let w = permutation_decomposition(&b).unwrap();
        prop_assert!(w.pi.iter().all(|&x| x >= 0.0));
        prop_assert!((w.reconstruct().entries() - b.entries()).amax() < 1e-12);
    }
}

#[test]
fn unistochastic_round_trip_on_a_thousand_samples() {
    let mut done = 0;
    let mut seed = 0;
    while done < 1000 {
        let b = sample_birkhoff(seed);
        seed += 1;
        if !is_unistochastic(&b).unwrap().member {
            continue;
        }
        let u = reconstruct_unitary(&b).unwrap();
        assert!(u.unitarity_defect() < 1e-12, "seed {seed}");
        let back = unistochastic_projection(&u);
        assert!((back.entries() - b.entries()).amax() < 1e-10, "seed {seed}");
        done += 1;
    }
}

#[test]
fn haar_projections_are_unistochastic() {
    for seed in 0..10_000 {
        let b = unistochastic_projection(&haar_random_unitary(3, seed).unwrap());
        assert!(is_unistochastic(&b).unwrap().member, "seed {seed}");
    }
}

#[test]
fn random_pairs_of_three_dimensional_tori() {
    let cfg = SolverConfig::default();
    let sets: Vec<_> = (0..1000u64)
        .into_par_iter()
        .map(|seed| find_intersections(&haar_random_unitary(3, seed).unwrap(), &cfg.clone().with_seed(seed)))
        .collect();
    for (seed, set) in sets.into_iter().enumerate() {
        let set = set.unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        match set.classification {
            Classification::FiniteTransversal => {
                assert!(matches!(set.points.len(), 4 | 6), "seed {seed}: {}", set.points.len());
                assert_eq!(set.index_sum(), 0, "seed {seed}");
            }
            Classification::FiniteDegenerate => assert!(matches!(set.points.len(), 3..=6)),
            Classification::Continuum => {}
        }
    }
}

#[test]
fn birkhoff_samples_are_bistochastic() {
    for seed in 0..1000 {
        let b: BistochasticMatrix = sample_birkhoff(seed);
        assert!(b.stochasticity_defect() < 1e-14);
        assert!(b.entries().iter().all(|&x| x >= 0.0));
    }
}
