use dihedral::geometry::WedgeSpec;
use dihedral::spectral::{gamma_first_eigenvalue, sl_eigen_1d, Endpoint, OpeningEigen, SlProblem};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Lowest eigenvalue of the symmetrized three-point scheme for
/// `-(w f')'/w + μ f/sin² = γ f`, `w = sin^d`, Dirichlet at both ends,
/// from a dense symmetric eigen-solve.
fn dense_fd(p: &SlProblem, n: usize) -> f64 {
    let h = (p.b - p.a) / n as f64;
    let w = |t: f64| t.sin().powi(p.d as i32);
    let m = n - 1;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        let t = p.a + (i + 1) as f64 * h;
        let (wl, wr) = (w(t - 0.5 * h), w(t + 0.5 * h));
        let wi = w(t);
        a[(i, i)] = (wl + wr) / (h * h * wi) + p.mu / (t.sin() * t.sin());
        if i + 1 < m {
            let tn = t + h;
            let off = -wr / (h * h * (wi * w(tn)).sqrt());
            a[(i, i + 1)] = off;
            a[(i + 1, i)] = off;
        }
    }
    SymmetricEigen::new(a).eigenvalues.min()
}

fn richardson(p: &SlProblem, n: usize) -> f64 {
    (4.0 * dense_fd(p, 2 * n) - dense_fd(p, n)) / 3.0
}

#[test]
fn shooting_matches_dense_fd_with_richardson() {
    for p in [
        SlProblem::dirichlet(0.3, 2.5, 1, 0.0),
        SlProblem::dirichlet(0.5, 2.0, 2, 2.0),
        SlProblem::dirichlet(0.2, 1.2, 0, 0.0),
        SlProblem::dirichlet(0.4, 2.9, 3, 6.25),
    ] {
        let shot = sl_eigen_1d(&p, 1e-10).unwrap().gamma;
        let fd = richardson(&p, 400);
        assert!((shot - fd).abs() <= 1e-5 * fd, "{p:?}: shooting {shot} vs dense {fd}");
    }
}

#[test]
fn flat_interval_is_exact() {
    let p = SlProblem::dirichlet(0.2, 1.2, 0, 0.0);
    let g = sl_eigen_1d(&p, 1e-10).unwrap().gamma;
    assert!((g - PI * PI).abs() < 1e-9 * PI * PI);
}

#[test]
fn legendre_caps_with_bounded_pole() {
    // Associated Legendre P_{m+1}^m vanishes on the equator: γ = (m+1)(m+2).
    for m in 0..4u32 {
        let mu = (m * m) as f64;
        let p = SlProblem { a: 0.0, b: PI / 2.0, d: 1, mu, left: Endpoint::BoundedPole, right: Endpoint::Dirichlet };
        let g = sl_eigen_1d(&p, 1e-11).unwrap().gamma;
        let exact = ((m + 1) * (m + 2)) as f64;
        assert!((g - exact).abs() <= 1e-7 * exact, "m = {m}: {g} vs {exact}");
    }
}

#[test]
fn right_angle_cone_chain() {
    // Octant opening in R^3: spherical harmonics of degree 3, γ = 12.
    let op = OpeningEigen::compute(&WedgeSpec::octant(), 1e-10).unwrap();
    assert!((op.gamma - 12.0).abs() < 1e-6);
    // ω' is positive inside and vanishes on the walls.
    let inside = op.omega_prime_at(&[0.3, 0.4, 0.5]).unwrap();
    assert!(inside > 0.0);
    assert!(op.omega_prime_at(&[0.0, 0.4, 0.5]).unwrap().abs() < 1e-9);
}

#[test]
fn omega_prime_of_dihedral_is_sine() {
    let a = 1.3;
    let op = OpeningEigen::compute(&WedgeSpec::dihedral(3, a), 1e-10).unwrap();
    let peak = op.omega_prime(&[a / 2.0]).unwrap();
    for t in [0.1, 0.5, 0.9, 1.2] {
        let v = op.omega_prime(&[t]).unwrap() / peak;
        assert!((v - (PI * t / a).sin()).abs() < 1e-8, "θ = {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dihedral_eigenvalue_closed_form(a in 0.2f64..6.2) {
        let g = gamma_first_eigenvalue(&WedgeSpec::dihedral(3, a), 1e-10).unwrap();
        prop_assert!((g - (PI / a).powi(2)).abs() <= 1e-8 * g);
    }

    #[test]
    fn wider_interval_lowers_eigenvalue(lo in 0.3f64..1.0, width in 0.5f64..1.5, grow in 0.05f64..0.5) {
        let hi = (lo + width).min(3.0);
        let spec = |b: f64| WedgeSpec { n: 4, k: 3, alpha1: PI / 2.0, intervals: vec![(lo, b)], pole_endpoints: false };
        let small = gamma_first_eigenvalue(&spec(hi), 1e-9).unwrap();
        let large = gamma_first_eigenvalue(&spec((hi + grow).min(3.1)), 1e-9).unwrap();
        prop_assert!(large <= small * (1.0 + 1e-9));
    }
}
