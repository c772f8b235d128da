use dihedral::besov::{besov_neg_integral, besov_neg_proxy, besov_pos_norm, GridFunction};
use dihedral::geometry::{Atom, DiscreteMeasure};
use dihedral::quadrature::QuadratureSpec;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-8)
}

fn tent(h: f64) -> GridFunction {
    let n = (3.0 / h).round() as usize + 1;
    GridFunction::sample(vec![n], h, &[-1.5], |x| (1.0 - x[0].abs()).max(0.0))
}

/// `‖tent‖²_{L²} + ∫∫ |f(x)-f(y)|² / |x-y|^{1+2s}` from the autocorrelation of the
/// tent, the cubic B-spline `A(h)`: the seminorm is `4 ∫_0^∞ h^{-1-2s} (A(0) - A(h)) dh`.
fn tent_norm_exact(s: f64) -> f64 {
    let mono = |a: f64, lo: f64, hi: f64| {
        if a == -1.0 {
            (hi / lo).ln()
        } else {
            (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
        }
    };
    let e = -1.0 - 2.0 * s;
    let near = 1.0 / (2.0 - 2.0 * s) - 1.0 / (2.0 * (3.0 - 2.0 * s));
    let mid = -2.0 / 3.0 * mono(e, 1.0, 2.0) + 2.0 * mono(e + 1.0, 1.0, 2.0) - mono(e + 2.0, 1.0, 2.0)
        + mono(e + 3.0, 1.0, 2.0) / 6.0;
    let far = 2.0 / 3.0 * 2f64.powf(-2.0 * s) / (2.0 * s);
    (2.0 / 3.0 + 4.0 * (near + mid + far)).sqrt()
}

#[test]
fn tent_gagliardo_norm_matches_autocorrelation() {
    for s in [0.3, 0.5, 0.7] {
        let exact = tent_norm_exact(s);
        let got = besov_pos_norm(&tent(0.01), s, 2.0).unwrap().value;
        assert!((got - exact).abs() <= 0.01 * exact, "s = {s}: {got} vs {exact}");
    }
}

#[test]
fn dirac_proxy_has_the_atomic_exponent() {
    // One atom on R^m: the Poisson proxy diverges as ε → 0 exactly when s ≤ m/q'.
    let d0 = DiscreteMeasure::dirac(vec![0.0], 1.0);
    let q = 1.8;
    let qp = q / (q - 1.0);
    let divergent = besov_neg_proxy(&d0, 0.2, q, 1e-3, &spec()).unwrap();
    assert!(0.2 <= 1.0 / qp && divergent.divergent);
    let finite = besov_neg_proxy(&d0, 0.9, q, 1e-3, &spec()).unwrap();
    assert!(0.9 > 1.0 / qp && !finite.divergent);
}

#[test]
fn clustered_atoms_approach_a_single_atom() {
    let single = besov_neg_integral(&DiscreteMeasure::dirac(vec![0.0], 1.0), 0.9, 1.8, 1e-3, &spec()).unwrap();
    let mut last = f64::INFINITY;
    for spread in [0.1, 0.01, 0.001] {
        let cluster = DiscreteMeasure {
            m: 1,
            atoms: (0..5).map(|i| Atom { z: vec![spread * (i as f64 - 2.0)], w: 0.2 }).collect(),
        };
        let v = besov_neg_integral(&cluster, 0.9, 1.8, 1e-3, &spec()).unwrap();
        let gap = (v - single).abs() / single;
        assert!(gap < last, "spread {spread}: gap {gap} did not shrink");
        last = gap;
    }
    assert!(last < 2e-3);
}

fn measure_strategy() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-1.0f64..1.0, 0.05f64..1.0), 1..5).prop_map(|atoms| DiscreteMeasure {
        m: 1,
        atoms: atoms.into_iter().map(|(z, w)| Atom { z: vec![z], w }).collect(),
    })
}

fn grid_strategy() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0f64..1.0, 6).prop_map(|c| {
        GridFunction::sample(vec![61], 0.05, &[-1.5], move |x| {
            let t = x[0];
            let bump = (1.0 - t * t).max(0.0).powi(2);
            bump * (c[0] + c[1] * t + c[2] * t * t + c[3] * (3.0 * t).sin() + c[4] * (5.0 * t).cos() + c[5])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn negative_proxy_is_q_homogeneous(mu in measure_strategy(), t in 0.2f64..5.0) {
        let a = besov_neg_integral(&mu.scaled(t), 0.5, 1.8, 1e-3, &spec()).unwrap();
        let b = besov_neg_integral(&mu, 0.5, 1.8, 1e-3, &spec()).unwrap();
        prop_assert!((a - t.powf(1.8) * b).abs() <= 1e-9 * a);
    }

    #[test]
    fn negative_proxy_satisfies_minkowski(mu in measure_strategy(), nu in measure_strategy()) {
        let q = 1.8;
        let sum = DiscreteMeasure { m: 1, atoms: mu.atoms.iter().chain(&nu.atoms).cloned().collect() };
        let n = |m: &DiscreteMeasure| besov_neg_integral(m, 0.5, q, 1e-3, &spec()).unwrap().powf(1.0 / q);
        prop_assert!(n(&sum) <= (n(&mu) + n(&nu)) * (1.0 + 1e-7));
    }

    #[test]
    fn positive_norm_is_a_norm(f in grid_strategy(), g in grid_strategy(), t in -3.0f64..3.0, s in 0.2f64..1.8) {
        let norm = |u: &GridFunction| besov_pos_norm(u, s, 2.0).map(|r| r.value);
        let (Ok(nf), Ok(ng)) = (norm(&f), norm(&g)) else { return Ok(()) };
        let sum = GridFunction::new(f.dims.clone(), f.h, f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect()).unwrap();
        if let Ok(ns) = norm(&sum) {
            prop_assert!(ns <= (nf + ng) * (1.0 + 1e-12));
        }
        if let Ok(nt) = norm(&f.scaled(t)) {
            prop_assert!((nt - t.abs() * nf).abs() <= 1e-12 * nt.max(1e-300));
        }
    }
}
