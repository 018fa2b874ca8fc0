use clifford_tori::birkhoff::{
    bistochastic_distance, is_unistochastic, section_boundary_trace, BistochasticMatrix, CrossSectionSpec, EVEN,
    ODD,
};
use clifford_tori::intersect::{scan_cell, scan_section, IntersectionCount, SolverConfig};

fn star() -> BistochasticMatrix {
    BistochasticMatrix::van_der_waerden(3)
}

#[test]
fn triangle_insphere_from_the_trace() {
    let spec = CrossSectionSpec::triangle();
    let trace = section_boundary_trace(&spec, 720);
    let inner = trace
        .iter()
        .map(|&(u, v)| bistochastic_distance(&spec.point(u, v).unwrap(), &star()))
        .fold(f64::INFINITY, f64::min);
    assert!((inner - 1.0 / 3.0).abs() < 1e-4, "insphere {inner}");
}

#[test]
fn polytope_edges_and_outsphere() {
    let id = BistochasticMatrix::permutation(0);
    for k in 0..6 {
        let p = BistochasticMatrix::permutation(k);
        assert!((bistochastic_distance(&p, &star()) - 1.0).abs() < 1e-12);
    }
    for &k in &ODD {
        assert!((bistochastic_distance(&id, &BistochasticMatrix::permutation(k)) - 2f64.sqrt()).abs() < 1e-12);
    }
    for &k in &EVEN[1..] {
        assert!((bistochastic_distance(&id, &BistochasticMatrix::permutation(k)) - 3f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn schur_matrices_are_not_unistochastic() {
    let s = BistochasticMatrix::combine(&[
        (0.5, &BistochasticMatrix::permutation(EVEN[1])),
        (0.5, &BistochasticMatrix::permutation(EVEN[2])),
    ]);
    assert!(!is_unistochastic(&s).unwrap().member);
}

#[test]
fn triangle_interior_has_six_points() {
    let spec = CrossSectionSpec::triangle();
    let cfg = SolverConfig::default();
    let cells = scan_section(&spec, 12, &cfg);
    let mut inside = 0;
    for c in cells.iter().filter(|c| c.member) {
        let margin = is_unistochastic(&spec.point(c.u, c.v).unwrap()).unwrap().margin;
        if margin > 1e-3 {
            assert_eq!(c.count, Some(IntersectionCount::Finite(6)), "({}, {})", c.u, c.v);
            inside += 1;
        }
    }
    assert!(inside > 10);
}

#[test]
fn regular_hexagon_has_two_regions() {
    let spec = CrossSectionSpec::hexagon([1.0, 0.0, 0.0]).unwrap();
    let cfg = SolverConfig::default();
    assert_eq!(scan_cell(&spec, 0.0, 0.0, &cfg).count, Some(IntersectionCount::Finite(6)));
    let rim = section_boundary_trace(&spec, 12);
    assert!(!rim.is_empty());
    for (u, v) in rim {
        let c = scan_cell(&spec, 0.95 * u, 0.95 * v, &cfg);
        assert_eq!(c.count, Some(IntersectionCount::Finite(4)), "({u}, {v})");
    }
}

#[test]
fn out_of_section_points_are_rejected() {
    let spec = CrossSectionSpec::triangle();
    assert!(spec.point(2.0, 2.0).is_err());
    assert!(CrossSectionSpec::facet(3, 0).is_err());
    assert!(CrossSectionSpec::parabolic(1, 0).is_err());
}
