//! Closed-form critical quantities of one stratum.
//!
//! For a k-wedge in `R^N` with first eigenvalue `γ` on `A ⊂ S^{k-1}`:
//!
//! * `κ+ = (2 - k + √((k-2)² + 4γ))/2`, `λ_A = γ + (N-k) κ+`,
//!   `κ- = 2 - N - κ+`;
//! * `q_c = (κ+ + N)/(κ+ + N - 2)` (Dirac masses on the edge are admissible
//!   iff `q < q_c`);
//! * `q_c* = 1 + 2/(κ+ + k - 2)` (the whole edge is removable iff `q ≥ q_c*`);
//! * `s(q) = 2 - (k + κ+)/q'` with `q' = q/(q-1)`, the smoothness index of the
//!   capacity `C_{s,q'}` on the edge.
//!
//! Vertices (`k = N`) have `q_c = q_c* = 1 - 2/κ-`. Faces (`k = 1`) have
//! `κ+ = 1`, `q_c = (N+1)/(N-1)` and no finite removability threshold:
//! `q_c* = +∞`, serialized as `null`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Discriminants within this distance of zero are clamped to zero.
pub const DISCRIMINANT_CLAMP: f64 = 1e-14;

fn clamped_sqrt(d: f64) -> Result<f64> {
    if d >= 0.0 {
        Ok(d.sqrt())
    } else if d > -DISCRIMINANT_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("negative discriminant {d}")))
    }
}

/// Positive root of `κ² + (k-2)κ - γ = 0`.
pub fn kappa_from_gamma(k: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("γ = {gamma} must be positive")));
    }
    if k < 2 {
        return Err(Error::Range(format!("kappa_from_gamma needs k ≥ 2, got {k}")));
    }
    let b = k as f64 - 2.0;
    Ok((-b + clamped_sqrt(b * b + 4.0 * gamma)?) / 2.0)
}

/// Both roots of `κ² + (N-2)κ - λ = 0`, larger first.
pub fn kappa_roots(n: usize, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ_A = {lambda} must be positive")));
    }
    let b = n as f64 - 2.0;
    let root = clamped_sqrt(b * b + 4.0 * lambda)?;
    let plus = (-b + root) / 2.0;
    // Avoid cancellation in the smaller-magnitude root.
    let minus = -lambda / plus;
    Ok((plus, minus))
}

/// `a_{N,q} = (2/(q-1)) (2q/(q-1) - N)`.
pub fn absorption_coefficient(n: usize, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    Ok(2.0 / (q - 1.0) * (2.0 * q / (q - 1.0) - n as f64))
}

/// Whether `a_{N,q_c} = λ_A` to `1e-10` relative, with `q_c` built from
/// the roots of the characteristic quadratic.
pub fn identity_check(n: usize, lambda: f64) -> Result<bool> {
    let (kp, _) = kappa_roots(n, lambda)?;
    let qc = (kp + n as f64) / (kp + n as f64 - 2.0);
    let a = absorption_coefficient(n, qc)?;
    Ok((a - lambda).abs() <= 1e-10 * lambda.abs())
}

/// `s = 2 - (k + κ+)(q-1)/q`.
pub fn capacity_index_s(k: usize, kappa_plus: f64, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    Ok(2.0 - (k as f64 + kappa_plus) * (q - 1.0) / q)
}

/// Conjugate exponent `q' = q/(q-1)`.
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

/// Critical quantities of one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    #[serde(skip)]
    pub n: usize,
    #[serde(skip)]
    pub k: usize,
    pub gamma: f64,
    #[serde(rename = "lambda_A")]
    pub lambda_a: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub q_c: f64,
    /// `+∞` for faces; serialized as `null`.
    pub q_c_star: f64,
}

impl ExponentReport {
    /// Edge dimension `m = N - k`.
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    /// Order `ν = N - 2 + 2κ+` of the kernel functionals.
    pub fn nu(&self) -> f64 {
        self.n as f64 - 2.0 + 2.0 * self.kappa_plus
    }

    /// `β = (q+1)κ+ + k - 1`, the weight exponent of the admissibility integral.
    pub fn beta(&self, q: f64) -> f64 {
        (q + 1.0) * self.kappa_plus + self.k as f64 - 1.0
    }

    pub fn s(&self, q: f64) -> Result<f64> {
        capacity_index_s(self.k, self.kappa_plus, q)
    }

    /// Exponent `e(q) = q(2 - N - κ+) + κ+ + N - 1` of the radial integrand of
    /// the Dirac admissibility integral; it converges iff `e + 1 > 0`.
    pub fn dirac_exponent(&self, q: f64) -> f64 {
        q * (2.0 - self.n as f64 - self.kappa_plus) + self.kappa_plus + self.n as f64 - 1.0
    }
}

/// Assembles the [`ExponentReport`] of a stratum with codimension `k` in `R^N`.
/// `gamma` is ignored for faces.
pub fn critical_exponents(n: usize, k: usize, gamma: f64) -> Result<ExponentReport> {
    if n < 2 {
        return Err(Error::Range(format!("N = {n} must be at least 2")));
    }
    if k < 1 || k > n {
        return Err(Error::Range(format!("k = {k} must lie in 1..={n}")));
    }
    let nf = n as f64;
    if k == 1 {
        let kp = 1.0;
        let lambda = nf - 1.0;
        return Ok(ExponentReport {
            n,
            k,
            gamma: 0.0,
            lambda_a: lambda,
            kappa_plus: kp,
            kappa_minus: 2.0 - nf - kp,
            q_c: (nf + 1.0) / (nf - 1.0),
            q_c_star: f64::INFINITY,
        });
    }
    let kp = kappa_from_gamma(k, gamma)?;
    let lambda = gamma + (n - k) as f64 * kp;
    let (kp2, km) = kappa_roots(n, lambda)?;
    debug_assert!((kp2 - kp).abs() <= 1e-9 * kp.max(1.0));
    let q_c = (kp + nf) / (kp + nf - 2.0);
    let q_c_star = if k == n {
        q_c
    } else {
        let b = k as f64 - 2.0;
        1.0 + (-b + clamped_sqrt(b * b + 4.0 * gamma)?) / gamma
    };
    Ok(ExponentReport {
        n,
        k,
        gamma,
        lambda_a: lambda,
        kappa_plus: kp,
        kappa_minus: km,
        q_c,
        q_c_star,
    })
}

/// Direct cone formula `(N + 2 + √((N-2)² + 4λ)) / (N - 2 + √((N-2)² + 4λ))`.
pub fn cone_q_c(n: usize, lambda: f64) -> f64 {
    let b = n as f64 - 2.0;
    let r = (b * b + 4.0 * lambda).sqrt();
    (n as f64 + 2.0 + r) / (b + r)
}
