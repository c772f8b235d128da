use dihedral::classify::{
    classify_polyhedron, good_measure_check, removable_check, stratum_verdict, CapacityEvidence, Regime, Status,
};
use dihedral::geometry::{
    CompactSetDescription, DiscreteMeasure, Opening, PieceShape, PolyhedronSpec, SetPiece, Stratum, WedgeSpec,
};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn rank(r: Regime) -> u8 {
    match r {
        Regime::Subcritical => 0,
        Regime::CapacityRegime => 1,
        Regime::RemovableStratum | Regime::VertexSupercritical => 2,
    }
}

fn prism(alpha: f64) -> PolyhedronSpec {
    PolyhedronSpec {
        n: 3,
        strata: vec![
            Stratum { id: "F".into(), k: 1, opening: None },
            Stratum { id: "E".into(), k: 2, opening: Some(Opening::Wedge(WedgeSpec::dihedral(3, alpha))) },
        ],
    }
}

#[test]
fn flat_edge_behaves_like_a_face() {
    let poly = prism(PI);
    let face = stratum_verdict(&poly, &poly.strata[0], 1.5).unwrap();
    let edge = stratum_verdict(&poly, &poly.strata[1], 1.5).unwrap();
    assert!((edge.q_c - face.q_c).abs() < 1e-9);
    assert!((edge.q_c_star - 3.0).abs() < 1e-8);
    for q in [1.5, 2.5] {
        let f = stratum_verdict(&poly, &poly.strata[0], q).unwrap();
        let e = stratum_verdict(&poly, &poly.strata[1], q).unwrap();
        assert_eq!(f.regime, e.regime, "q = {q}");
    }
}

#[test]
fn face_threshold_is_null_in_json() {
    let v = classify_polyhedron(&PolyhedronSpec::cube(), 1.7).unwrap();
    let json = serde_json::to_value(&v[0]).unwrap();
    assert!(json["q_c_star"].is_null());
    assert_eq!(json["regime"], "subcritical");
}

#[test]
fn good_measure_with_point_evidence() {
    let cube = PolyhedronSpec::cube();
    let mut measures = BTreeMap::new();
    measures.insert("E1".to_string(), DiscreteMeasure::dirac(vec![0.2], 1.0));
    // Below q_c everything is accepted.
    let low = good_measure_check(&cube, &measures, 1.5, &CapacityEvidence::default()).unwrap();
    assert_eq!(low.status, Status::Accept);
    // Between q_c and q_c* a point of an edge is null, so a Dirac mass is rejected.
    let ev = CapacityEvidence::default().with_point_evidence(&cube, &measures, 1.8).unwrap();
    let mid = good_measure_check(&cube, &measures, 1.8, &ev).unwrap();
    assert_eq!(mid.status, Status::Reject);
    assert!(good_measure_check(&cube, &measures, 1.8, &CapacityEvidence::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn regime_is_monotone_in_q(alpha in 0.3f64..6.0, q1 in 1.05f64..6.0, dq in 0.0f64..3.0) {
        let poly = prism(alpha);
        let a = classify_polyhedron(&poly, q1).unwrap();
        let b = classify_polyhedron(&poly, q1 + dq).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rank(x.regime) <= rank(y.regime), "{:?} then {:?}", x.regime, y.regime);
        }
    }

    #[test]
    fn removability_is_monotone_in_q(q1 in 1.05f64..4.0, dq in 0.0f64..2.0, which in 0usize..3, radius in 0.05f64..0.4) {
        let cube = PolyhedronSpec::cube();
        let piece = match which {
            0 => SetPiece { stratum: "V1".into(), shape: PieceShape::Point { z: vec![] } },
            1 => SetPiece { stratum: "E1".into(), shape: PieceShape::Point { z: vec![0.5] } },
            _ => SetPiece { stratum: "E1".into(), shape: PieceShape::Ball { center: vec![0.5], radius, dim: None } },
        };
        let set = CompactSetDescription { pieces: vec![piece] };
        let ev = CapacityEvidence::default();
        let a = removable_check(&cube, &set, q1, &ev).unwrap();
        let b = removable_check(&cube, &set, q1 + dq, &ev).unwrap();
        prop_assert!(!a.removable || b.removable);
    }
}
