use dihedral::exponents::{capacity_index_s, conjugate, critical_exponents, kappa_roots};
use dihedral::geometry::{
    cartesian_to_spherical, decompose_measure, spherical_to_cartesian, validate_wedge, Atom, DiscreteMeasure,
    PolyhedronSpec, WedgeSpec,
};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn angles() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..7, 0.01f64..2.0 * PI - 0.01, prop::collection::vec(0.01f64..PI - 0.01, 5)).prop_map(|(n, a, rest)| {
        let mut v = vec![a];
        v.extend_from_slice(&rest[..n - 2]);
        (n, v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spherical_round_trip((_n, sigma) in angles(), r in 0.01f64..100.0) {
        let x = spherical_to_cartesian(r, &sigma).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - r).abs() <= 1e-12 * r);
        let (r2, s2) = cartesian_to_spherical(&x).unwrap();
        prop_assert!((r2 - r).abs() <= 1e-12 * r);
        let back = spherical_to_cartesian(r2, &s2).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn wedge_validation_is_exactly_the_inequalities(
        alpha in -1.0f64..7.5,
        intervals in prop::collection::vec((-0.5f64..3.7, -0.5f64..3.7), 0..3),
    ) {
        let k = 2 + intervals.len();
        let w = WedgeSpec { n: k + 1, k, alpha1: alpha, intervals: intervals.clone(), pole_endpoints: false };
        let expected = alpha > 0.0 && alpha < 2.0 * PI && intervals.iter().all(|&(a, b)| 0.0 < a && a < b && b < PI);
        prop_assert_eq!(validate_wedge(&w).is_ok(), expected);
    }

    #[test]
    fn vieta_relations(n in 2usize..10, lambda in 0.01f64..500.0) {
        let (kp, km) = kappa_roots(n, lambda).unwrap();
        prop_assert!((kp + km - (2.0 - n as f64)).abs() <= 1e-10 * kp.abs().max(n as f64));
        prop_assert!((kp * km + lambda).abs() <= 1e-10 * lambda);
    }

    #[test]
    fn capacity_index_at_the_thresholds(n in 3usize..8, k_off in 0usize..5, gamma in 0.1f64..50.0) {
        // At q_c a point of the edge is exactly critical (s q' = m); at q_c* the index vanishes.
        let k = 2 + k_off % (n - 2);
        let r = critical_exponents(n, k, gamma).unwrap();
        let s_c = capacity_index_s(k, r.kappa_plus, r.q_c).unwrap();
        prop_assert!((s_c * conjugate(r.q_c) - r.m() as f64).abs() <= 1e-10 * r.m() as f64);
        let s_star = capacity_index_s(k, r.kappa_plus, r.q_c_star).unwrap();
        prop_assert!(s_star.abs() <= 1e-10);
        prop_assert!(r.q_c < r.q_c_star);
    }

    #[test]
    fn decomposition_preserves_mass_and_is_idempotent(
        weights in prop::collection::vec((0usize..3, 0.0f64..5.0, -1.0f64..1.0), 0..8),
    ) {
        let cube = PolyhedronSpec::cube();
        let ids = ["F2", "E5", "V3"];
        let mut input: BTreeMap<String, DiscreteMeasure> = BTreeMap::new();
        for (which, w, z) in &weights {
            let id = ids[*which];
            let m = cube.stratum(id).unwrap();
            let dim = 3 - m.k;
            let entry = input.entry(id.to_string()).or_insert_with(|| DiscreteMeasure::zero(dim));
            entry.atoms.push(Atom { z: vec![*z; dim], w: *w });
        }
        let once = decompose_measure(&cube, &input).unwrap();
        let twice = decompose_measure(&cube, &once).unwrap();
        prop_assert_eq!(&once, &twice);
        let total_in: f64 = input.values().map(|m| m.mass()).sum();
        let total_out: f64 = once.values().map(|m| m.mass()).sum();
        prop_assert!((total_in - total_out).abs() <= 1e-12 * total_in.max(1.0));
    }
}

#[test]
fn octant_exponents() {
    let r = critical_exponents(3, 3, 12.0).unwrap();
    assert!((r.kappa_plus - 3.0).abs() < 1e-12);
    assert!((r.kappa_minus + 4.0).abs() < 1e-12);
    assert!((r.q_c - 1.5).abs() < 1e-12);
}

#[test]
fn face_thresholds() {
    for n in 2..8 {
        let r = critical_exponents(n, 1, 0.0).unwrap();
        assert_eq!(r.kappa_plus, 1.0);
        assert!((r.q_c - (n as f64 + 1.0) / (n as f64 - 1.0)).abs() < 1e-15);
        assert!(r.q_c_star.is_infinite());
    }
}
