use dihedral::exponents::critical_exponents;
use dihedral::geometry::{Atom, DiscreteMeasure, WedgeSpec};
use dihedral::kernels::{f_nu_m, j_ar, k_nu_m, martin_kernel, Truncation};
use dihedral::quadrature::QuadratureSpec;
use dihedral::spectral::OpeningEigen;
use proptest::prelude::*;
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

fn spec() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-10)
}

fn f_value(tau: f64, mu: &DiscreteMeasure, nu: f64, q: f64, region: Truncation) -> f64 {
    f_nu_m(tau, mu, nu, q, region, &spec()).unwrap().value
}

/// `∫_{|y|<R} (τ² + y²)^{-a} dy` on the line.
fn line_ball(tau: f64, a: f64, r: f64) -> f64 {
    let x = r * r / (tau * tau + r * r);
    tau.powf(1.0 - 2.0 * a) * beta(0.5, a - 0.5) * beta_reg(0.5, a - 0.5, x)
}

#[test]
fn dirac_on_the_line_matches_beta_functions() {
    let d0 = DiscreteMeasure::dirac(vec![0.0], 1.0);
    for (nu, q) in [(3.0, 2.0), (5.0, 1.5), (2.5, 1.2)] {
        let a = nu * q / 2.0;
        for tau in [0.05f64, 0.7, 3.0] {
            let whole = tau.powf(1.0 - 2.0 * a) * PI.sqrt() * gamma(a - 0.5) / gamma(a);
            let got = f_value(tau, &d0, nu, q, Truncation::Whole);
            assert!((got - whole).abs() <= 1e-8 * whole, "whole ν={nu} q={q} τ={tau}: {got} vs {whole}");
            let ball = line_ball(tau, a, 2.0);
            let got = f_value(tau, &d0, nu, q, Truncation::Ball(2.0));
            assert!((got - ball).abs() <= 1e-8 * ball, "ball ν={nu} q={q} τ={tau}: {got} vs {ball}");
            // Complementary form; `whole - ball` cancels for small τ.
            let outside = tau.powf(1.0 - 2.0 * a) * beta(0.5, a - 0.5) * beta_reg(a - 0.5, 0.5, tau * tau / (tau * tau + 4.0));
            let got = f_value(tau, &d0, nu, q, Truncation::Outside(2.0));
            assert!((got - outside).abs() <= 1e-7 * outside, "outside ν={nu} q={q} τ={tau}: {got} vs {outside}");
        }
    }
}

#[test]
fn dirac_in_the_plane_matches_closed_form() {
    let d0 = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0);
    let (nu, q, r) = (3.0f64, 1.5f64, 1.5f64);
    let a = nu * q / 2.0;
    for tau in [0.1f64, 0.8, 2.0] {
        let whole = PI * tau.powf(2.0 - 2.0 * a) / (a - 1.0);
        let ball = PI * (tau.powf(2.0 - 2.0 * a) - (tau * tau + r * r).powf(1.0 - a)) / (a - 1.0);
        let w = f_value(tau, &d0, nu, q, Truncation::Whole);
        let b = f_value(tau, &d0, nu, q, Truncation::Ball(r));
        assert!((w - whole).abs() <= 1e-7 * whole, "τ={tau}: {w} vs {whole}");
        assert!((b - ball).abs() <= 1e-7 * ball, "τ={tau}: {b} vs {ball}");
    }
}

#[test]
fn f_diverges_when_kernel_is_not_integrable() {
    let d0 = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0);
    assert!(f_nu_m(1.0, &d0, 1.0, 2.0, Truncation::Whole, &spec()).is_err());
    assert!(f_nu_m(1.0, &d0, 1.0, 2.0, Truncation::Ball(1.0), &spec()).is_ok());
}

#[test]
fn admissibility_of_dirac_matches_radial_formula() {
    // J(δ_0) = ∫_ε^R τ^{w} F^R(τ) dτ; on the line F^R has the beta form.
    let report = critical_exponents(3, 2, 4.0).unwrap();
    let (q, r, eps) = (1.5, 2.0, 1e-3);
    let d0 = DiscreteMeasure::dirac(vec![0.0], 1.0);
    let j = j_ar(&d0, &report, r, q, &QuadratureSpec::with_tol(1e-9).with_cutoff(eps)).unwrap().value;
    let s = report.s(q).unwrap();
    let nu = report.nu();
    let w = (s + nu - 1.0) * q - 1.0;
    let a = nu * q / 2.0;
    // Gauss–Legendre in log τ on dyadic panels.
    let (nodes, weights) = gauss_legendre_16();
    let mut oracle = 0.0;
    let mut lo = eps;
    while lo < r {
        let hi = (2.0 * lo).min(r);
        let (u0, u1) = (lo.ln(), hi.ln());
        for (x, wt) in nodes.iter().zip(&weights) {
            let u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * x;
            let t = u.exp();
            oracle += 0.5 * (u1 - u0) * wt * t * t.powf(w) * line_ball(t, a, r);
        }
        lo = hi;
    }
    assert!((j - oracle).abs() <= 1e-7 * oracle, "{j} vs {oracle}");
}

fn gauss_legendre_16() -> (Vec<f64>, Vec<f64>) {
    // Newton on P_16 from Chebyshev guesses.
    let n = 16;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                nodes.push(x);
                weights.push(w);
                break;
            }
        }
    }
    (nodes, weights)
}

#[test]
fn martin_kernel_is_positive_inside_and_zero_on_walls() {
    let report = critical_exponents(3, 2, 4.0).unwrap();
    let op = OpeningEigen::compute(&WedgeSpec::dihedral(3, PI / 2.0), 1e-10).unwrap();
    let inside = martin_kernel(&[0.4, 0.7, 0.2], &[0.0], &report, &op).unwrap();
    assert!(inside > 0.0);
    let wall = martin_kernel(&[0.0, 0.7, 0.2], &[0.0], &report, &op).unwrap();
    assert!(wall.abs() < 1e-12);
    // Closed form for the right angle: 2 x1 x2 / |x - z|^{N-2+2κ+}.
    let x: [f64; 3] = [0.4, 0.7, 0.2];
    let peak = op.omega_prime(&[PI / 4.0]).unwrap();
    let d2: f64 = x.iter().map(|v| v * v).sum();
    let expected = 2.0 * x[0] * x[1] / peak * d2.powf(-2.5);
    assert!((inside - expected).abs() < 1e-9 * expected, "{inside} vs {expected}");
}

fn measure_strategy(m: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, m), 0.05f64..1.0), 1..5).prop_map(move |atoms| {
        DiscreteMeasure { m, atoms: atoms.into_iter().map(|(z, w)| Atom { z, w }).collect() }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn k_nu_m_is_linear(mu in measure_strategy(2), tau in 0.1f64..2.0, t in 0.1f64..3.0) {
        let zeta = [0.3, -0.2];
        let a = k_nu_m(tau, &zeta, &mu.scaled(t), 3.5).unwrap();
        let b = k_nu_m(tau, &zeta, &mu, 3.5).unwrap();
        prop_assert!((a - t * b).abs() <= 1e-13 * a.abs());
    }

    #[test]
    fn admissibility_is_q_homogeneous(mu in measure_strategy(1), t in 0.2f64..5.0) {
        let report = critical_exponents(3, 2, 4.0).unwrap();
        let spec = QuadratureSpec::with_tol(1e-8).with_cutoff(1e-3);
        let a = j_ar(&mu.scaled(t), &report, 4.0, 1.8, &spec).unwrap().value;
        let b = j_ar(&mu, &report, 4.0, 1.8, &spec).unwrap().value;
        prop_assert!((a - t.powf(1.8) * b).abs() <= 1e-9 * a);
    }

    #[test]
    fn f_is_translation_invariant(mu in measure_strategy(1), shift in -3.0f64..3.0, tau in 0.05f64..2.0) {
        let a = f_value(tau, &mu, 3.0, 2.0, Truncation::Whole);
        let b = f_value(tau, &mu.translated(&[shift]), 3.0, 2.0, Truncation::Whole);
        prop_assert!((a - b).abs() <= 1e-7 * a);
    }

    #[test]
    fn f_scales_with_the_measure_support(mu in measure_strategy(1), t in 0.3f64..3.0, tau in 0.1f64..1.0) {
        // Positions scaled by t: F[μ_t](tτ) = t^{m - νq} F[μ](τ).
        let (nu, q) = (2.5, 1.6);
        let stretched = DiscreteMeasure {
            m: 1,
            atoms: mu.atoms.iter().map(|a| Atom { z: vec![t * a.z[0]], w: a.w }).collect(),
        };
        let a = f_value(t * tau, &stretched, nu, q, Truncation::Whole);
        let b = f_value(tau, &mu, nu, q, Truncation::Whole);
        prop_assert!((a - t.powf(1.0 - nu * q) * b).abs() <= 1e-7 * a);
    }

    #[test]
    fn ball_and_outside_add_up(mu in measure_strategy(1), r in 0.5f64..4.0, tau in 0.05f64..2.0) {
        let whole = f_value(tau, &mu, 3.0, 1.5, Truncation::Whole);
        let ball = f_value(tau, &mu, 3.0, 1.5, Truncation::Ball(r));
        let out = f_value(tau, &mu, 3.0, 1.5, Truncation::Outside(r));
        prop_assert!((ball + out - whole).abs() <= 1e-7 * whole);
    }
}
