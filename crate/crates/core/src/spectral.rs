//! First Dirichlet eigenvalue of an angular box `A ⊂ S^{k-1}` by separation
//! of variables.
//!
//! The Laplace–Beltrami operator on `S^j` splits as
//! `(sinθ_j)^{-(j-1)} ∂(sin^{j-1} ∂) + (sinθ_j)^{-2} Δ_{S^{j-1}}`, so the box
//! eigenvalue is obtained from a chain of one-angle Sturm–Liouville problems
//!
//! ```text
//! (sinθ)^{-d} ((sinθ)^d f')' - μ (sinθ)^{-2} f + γ f = 0   on (a, b)
//! ```
//!
//! starting from `μ_1 = (π/α_1)²` with `d = j - 1` at stage `j`. Each stage
//! keeps only the lowest mode: the eigenvalue increases with `μ`.
//!
//! Each one-angle problem is bracketed by a conservative second-order finite
//! difference scheme (Sturm-sequence bisection on the symmetric tridiagonal
//! matrix) and refined by RK4 shooting from both ends with Wronskian
//! matching. Near a pole the shooting variable is logarithmic in the distance
//! to the pole and starts from the Frobenius solution `θ^r (1 + c θ²)`,
//! `r(r + d - 1) = μ`.

use crate::exponents::kappa_from_gamma;
use crate::geometry::{cartesian_to_spherical, validate_wedge, WedgeSpec};
use crate::quadrature::brent;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 4096;
/// Distance from a pole at which shooting starts.
pub const POLE_START: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    Dirichlet,
    /// Bounded (Frobenius principal) solution at `θ = 0` or `θ = π`.
    BoundedPole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlProblem {
    pub a: f64,
    pub b: f64,
    pub d: u32,
    pub mu: f64,
    pub left: Endpoint,
    pub right: Endpoint,
}

impl SlProblem {
    pub fn dirichlet(a: f64, b: f64, d: u32, mu: f64) -> Self {
        SlProblem { a, b, d, mu, left: Endpoint::Dirichlet, right: Endpoint::Dirichlet }
    }

    /// Larger root of the indicial equation `r(r + d - 1) = μ`.
    pub fn frobenius_exponent(&self) -> f64 {
        let dm1 = self.d as f64 - 1.0;
        (-dm1 + (dm1 * dm1 + 4.0 * self.mu).sqrt()) / 2.0
    }

    fn singular_at_pole(&self) -> bool {
        self.d > 0 || self.mu > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.b <= PI && self.a < self.b) {
            return Err(Error::Domain(format!(
                "interval ({}, {}) must satisfy 0 ≤ a < b ≤ π",
                self.a, self.b
            )));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Domain(format!("μ = {} must be finite and ≥ 0", self.mu)));
        }
        for (end, at_pole, name) in [
            (self.left, self.a == 0.0, "left"),
            (self.right, self.b == PI, "right"),
        ] {
            match end {
                Endpoint::BoundedPole if !at_pole => {
                    return Err(Error::Validation(format!(
                        "{name} endpoint is not a pole but asks for bounded-pole mode"
                    )))
                }
                Endpoint::Dirichlet if at_pole && self.singular_at_pole() => {
                    return Err(Error::PoleEndpoint(format!(
                        "{name} endpoint is a singular pole; use bounded-pole mode"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn pole_left(&self) -> bool {
        self.left == Endpoint::BoundedPole
    }

    fn pole_right(&self) -> bool {
        self.right == Endpoint::BoundedPole
    }
}

fn sin_pow(theta: f64, d: u32) -> f64 {
    theta.sin().powi(d as i32)
}

// ─── Finite differences ──────────────────────────────────────────────────────

/// Symmetric tridiagonal matrix `(diag, off)` of the conservative scheme on
/// `n` uniform cells, together with the node abscissae.
fn fd_matrix(p: &SlProblem, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = (p.b - p.a) / n as f64;
    let r = p.frobenius_exponent();
    let neumann_left = p.pole_left() && r == 0.0;
    let neumann_right = p.pole_right() && r == 0.0;
    let first = if neumann_left { 0 } else { 1 };
    let last = if neumann_right { n } else { n - 1 };
    let theta = |i: usize| p.a + i as f64 * h;
    let flux = |i: usize| sin_pow(p.a + (i as f64 + 0.5) * h, p.d) / h; // between i and i+1
    let pole_volume = || {
        // ∫_0^{h/2} sin^d ≈ (h/2)^{d+1}/(d+1) (1 - (d+1)(h/2)²/(6(d+3)))
        let x = 0.5 * h;
        let d = p.d as f64;
        x.powf(d + 1.0) / (d + 1.0) * (1.0 - d * (d + 1.0) * x * x / (6.0 * (d + 3.0)))
    };
    let mut nodes = Vec::new();
    let mut diag = Vec::new();
    let mut vol = Vec::new();
    for i in first..=last {
        let t = theta(i);
        nodes.push(t);
        let left_flux = if i == 0 { 0.0 } else { flux(i - 1) };
        let right_flux = if i == n { 0.0 } else { flux(i) };
        let (v, pot) = if (i == 0 && neumann_left) || (i == n && neumann_right) {
            (pole_volume(), 0.0)
        } else {
            let w = sin_pow(t, p.d);
            (h * w, h * w * p.mu / (t.sin() * t.sin()))
        };
        diag.push((left_flux + right_flux + pot) / v);
        vol.push(v);
    }
    let mut off = Vec::new();
    for idx in 0..nodes.len().saturating_sub(1) {
        let i = first + idx;
        off.push(-flux(i) / (vol[idx] * vol[idx + 1]).sqrt());
    }
    (diag, off, nodes)
}

/// Number of eigenvalues below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the finite-difference discretization on `n` cells.
pub fn fd_eigenvalue(p: &SlProblem, n: usize) -> Result<f64> {
    p.validate()?;
    let (diag, off, _) = fd_matrix(p, n.max(4));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + off.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ─── Shooting ────────────────────────────────────────────────────────────────

/// State `(f, z = sin^d f')` of one half-shot at the matching point.
#[derive(Clone, Copy)]
struct HalfShot {
    f: f64,
    z: f64,
    zeros: usize,
}

/// Integrates from one endpoint to `c` in `steps` RK4 steps. `from_left`
/// selects the endpoint `a` (true) or `b` (false). When `record` is given,
/// pushes `(θ, f, df/dθ)` at every step.
fn shoot_half(
    p: &SlProblem,
    gamma: f64,
    c: f64,
    from_left: bool,
    steps: usize,
    mut record: Option<&mut Vec<(f64, f64, f64)>>,
) -> HalfShot {
    let (e, pole) = if from_left { (p.a, p.pole_left()) } else { (p.b, p.pole_right()) };
    let dir = if from_left { 1.0 } else { -1.0 };
    let len = (c - e).abs();
    let r = p.frobenius_exponent();
    let d = p.d as f64;
    let log_span = (len / POLE_START).ln();
    // θ(s) and dθ/ds.
    let map = |s: f64| -> (f64, f64) {
        if pole {
            let delta = POLE_START * (s * log_span).exp();
            (e + dir * delta, dir * delta * log_span)
        } else {
            (e + dir * len * s, dir * len)
        }
    };
    let rhs = |s: f64, f: f64, z: f64| -> (f64, f64) {
        let (t, dt) = map(s);
        let sn = t.sin();
        let w = sn.powi(p.d as i32);
        let pot = if p.mu == 0.0 { 0.0 } else { p.mu / (sn * sn) };
        (dt * z / w, dt * w * (pot - gamma) * f)
    };
    let (mut f, mut z) = if pole {
        let delta = POLE_START;
        let cc = (d * r / 3.0 + p.mu / 3.0 - gamma) / (4.0 * r + 2.0 + 2.0 * d);
        let fv = delta.powf(r) * (1.0 + cc * delta * delta);
        let dfd = r * delta.powf(r - 1.0) + cc * (r + 2.0) * delta.powf(r + 1.0);
        let t = e + dir * delta;
        (fv, sin_pow(t, p.d) * dir * dfd)
    } else {
        (0.0, sin_pow(e, p.d) * dir)
    };
    let h = 1.0 / steps as f64;
    let mut zeros = 0;
    let mut last_sign = if f != 0.0 { f.signum() } else { 1.0 };
    let push = |rec: &mut Option<&mut Vec<(f64, f64, f64)>>, s: f64, f: f64, z: f64| {
        if let Some(v) = rec.as_deref_mut() {
            let (t, _) = map(s);
            let w = sin_pow(t, p.d);
            let fp = if w > 0.0 { z / w } else { 0.0 };
            v.push((t, f, fp));
        }
    };
    push(&mut record, 0.0, f, z);
    for i in 0..steps {
        let s = i as f64 * h;
        let (k1f, k1z) = rhs(s, f, z);
        let (k2f, k2z) = rhs(s + 0.5 * h, f + 0.5 * h * k1f, z + 0.5 * h * k1z);
        let (k3f, k3z) = rhs(s + 0.5 * h, f + 0.5 * h * k2f, z + 0.5 * h * k2z);
        let (k4f, k4z) = rhs(s + h, f + h * k3f, z + h * k3z);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        if f != 0.0 && f.signum() != last_sign {
            zeros += 1;
            last_sign = f.signum();
        }
        push(&mut record, s + h, f, z);
    }
    HalfShot { f, z, zeros }
}

fn matching_point(p: &SlProblem) -> f64 {
    0.5 * (p.a + p.b)
}

/// Normalized Wronskian mismatch at the matching point.
fn mismatch(p: &SlProblem, gamma: f64, steps: usize) -> (f64, usize) {
    let c = matching_point(p);
    let l = shoot_half(p, gamma, c, true, steps, None);
    let r = shoot_half(p, gamma, c, false, steps, None);
    let w = l.f * r.z - r.f * l.z;
    let norm = ((l.f * l.f + l.z * l.z) * (r.f * r.f + r.z * r.z)).sqrt();
    (w / norm, l.zeros + r.zeros)
}

fn shoot_eigenvalue(p: &SlProblem, guess: f64, tol: f64, steps: usize) -> Result<f64> {
    let g = |x: f64| mismatch(p, x, steps).0;
    let mut delta = 1e-3 * guess.abs() + 1e-10;
    let (mut lo, mut hi) = ((guess - delta).max(1e-300), guess + delta);
    let (mut flo, mut fhi) = (g(lo), g(hi));
    let mut tries = 0;
    while flo.signum() == fhi.signum() {
        tries += 1;
        if tries > 40 {
            return Err(Error::Bracket(format!(
                "no sign change of the shooting mismatch around γ ≈ {guess}"
            )));
        }
        delta *= 2.0;
        lo = (guess - delta).max(1e-300);
        hi = guess + delta;
        flo = g(lo);
        fhi = g(hi);
    }
    let root = brent(g, lo, hi, 1e-3 * tol * guess.abs().max(1e-12), 200)?;
    let zeros = mismatch(p, root, steps).1;
    if zeros != 0 {
        return Err(Error::Bracket(format!(
            "shooting root γ = {root} has {zeros} interior nodes; not the first eigenvalue"
        )));
    }
    Ok(root)
}

/// Result of one Sturm–Liouville solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub gamma: f64,
    /// `(θ, f(θ))` on a uniform grid including both endpoints.
    pub samples: Vec<(f64, f64)>,
    pub h: f64,
    pub error_estimate: f64,
    #[serde(skip)]
    problem: Option<SlProblem>,
    /// `(θ, f, f')` nodes of the final shot, increasing in θ, max f = 1.
    #[serde(skip)]
    profile: Vec<(f64, f64, f64)>,
}

impl EigenResult {
    pub fn problem(&self) -> Option<&SlProblem> {
        self.problem.as_ref()
    }

    /// Eigenfunction at `θ` by cubic Hermite interpolation of the shot;
    /// zero outside `[a, b]`.
    pub fn eval(&self, theta: f64) -> f64 {
        let Some(p) = self.problem else { return f64::NAN };
        if theta < p.a || theta > p.b {
            return 0.0;
        }
        let prof = &self.profile;
        let (t0, f0, _) = prof[0];
        let (tn, fn_, _) = prof[prof.len() - 1];
        let r = p.frobenius_exponent();
        if theta < t0 {
            // Between a pole and the first shooting node: Frobenius leading term.
            return if p.pole_left() { f0 * ((theta - p.a) / (t0 - p.a)).powf(r) } else { f0 };
        }
        if theta > tn {
            return if p.pole_right() { fn_ * ((p.b - theta) / (p.b - tn)).powf(r) } else { fn_ };
        }
        let idx = match prof.binary_search_by(|n| n.0.total_cmp(&theta)) {
            Ok(i) => return prof[i].1,
            Err(i) => i,
        };
        let (x0, y0, d0) = prof[idx - 1];
        let (x1, y1, d1) = prof[idx];
        hermite(x0, y0, d0, x1, y1, d1, theta)
    }
}

fn hermite(x0: f64, y0: f64, d0: f64, x1: f64, y1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Smallest eigenvalue with a positive eigenfunction, to relative `tol`.
pub fn sl_eigen_1d(p: &SlProblem, tol: f64) -> Result<EigenResult> {
    sl_eigen_1d_with_grid(p, tol, DEFAULT_GRID)
}

pub fn sl_eigen_1d_with_grid(p: &SlProblem, tol: f64, grid: usize) -> Result<EigenResult> {
    p.validate()?;
    if !(tol > 1e-12 && tol < 1e-2) {
        return Err(Error::Configuration(format!("tolerance {tol} outside (1e-12, 1e-2)")));
    }
    let guess = fd_eigenvalue(p, grid)?;
    let mut steps = 512;
    let mut coarse = shoot_eigenvalue(p, guess, tol, steps)?;
    let (gamma, err) = loop {
        let fine = shoot_eigenvalue(p, coarse, tol, 2 * steps)?;
        let err = (fine - coarse).abs() / 15.0;
        steps *= 2;
        if err <= tol * fine.abs() {
            break (fine, err);
        }
        if steps >= 1 << 18 {
            return Err(Error::Accuracy { estimate: fine, error: err });
        }
        coarse = fine;
    };

    let c = matching_point(p);
    let mut left = Vec::with_capacity(steps + 1);
    let mut right = Vec::with_capacity(steps + 1);
    let l = shoot_half(p, gamma, c, true, steps, Some(&mut left));
    let r = shoot_half(p, gamma, c, false, steps, Some(&mut right));
    let scale = l.f / r.f;
    let mut profile = left;
    profile.pop();
    profile.extend(right.into_iter().rev().map(|(t, f, d)| (t, f * scale, d * scale)));
    let mut result = EigenResult {
        gamma,
        samples: Vec::new(),
        h: (p.b - p.a) / grid as f64,
        error_estimate: err,
        problem: Some(*p),
        profile,
    };
    let fmax = refine_max(&result);
    for n in result.profile.iter_mut() {
        n.1 /= fmax;
        n.2 /= fmax;
    }
    result.samples = (0..=grid)
        .map(|i| {
            let t = if i == grid { p.b } else { p.a + i as f64 * result.h };
            (t, result.eval(t))
        })
        .collect();
    Ok(result)
}

/// Maximum of the interpolated profile (golden-section around the best node).
fn refine_max(r: &EigenResult) -> f64 {
    let prof = &r.profile;
    let (imax, _) = prof
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, n)| if n.1 > acc.1 { (i, n.1) } else { acc });
    let lo = prof[imax.saturating_sub(1)].0;
    let hi = prof[(imax + 1).min(prof.len() - 1)].0;
    let (mut a, mut b) = (lo, hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if r.eval(x1) > r.eval(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    r.eval(0.5 * (a + b)).max(prof[imax].1)
}

// ─── Chain on the opening ────────────────────────────────────────────────────

/// First eigenpair of an angular box `A ⊂ S^{k-1}` from the separation chain.
#[derive(Debug, Clone, Serialize)]
pub struct OpeningEigen {
    pub spec: WedgeSpec,
    pub gamma: f64,
    pub stages: Vec<EigenResult>,
}

impl OpeningEigen {
    pub fn compute(spec: &WedgeSpec, tol: f64) -> Result<Self> {
        let spec = validate_wedge(spec)?;
        if spec.k < 2 {
            return Err(Error::Range("the eigenvalue chain needs k ≥ 2".into()));
        }
        let mut mu = (PI / spec.alpha1).powi(2);
        let mut stages = Vec::new();
        for (i, &(a, b)) in spec.intervals.iter().enumerate() {
            let d = (i + 1) as u32;
            let left = if a == 0.0 { Endpoint::BoundedPole } else { Endpoint::Dirichlet };
            let right = if b == PI { Endpoint::BoundedPole } else { Endpoint::Dirichlet };
            let res = sl_eigen_1d(&SlProblem { a, b, d, mu, left, right }, tol)?;
            mu = res.gamma;
            stages.push(res);
        }
        Ok(OpeningEigen { spec, gamma: mu, stages })
    }

    /// Eigenfunction `ω'` on `A` at angles `θ_1..θ_{k-1}`; max 1, zero on `∂A`.
    pub fn omega_prime(&self, angles: &[f64]) -> Result<f64> {
        if angles.len() != self.spec.k - 1 {
            return Err(Error::Domain(format!(
                "expected {} angles, got {}",
                self.spec.k - 1,
                angles.len()
            )));
        }
        if !self.spec.in_closed_opening(angles) {
            return Err(Error::Domain("angles outside the closed opening".into()));
        }
        let t1 = angles[0].clamp(0.0, self.spec.alpha1);
        let mut v = (PI * t1 / self.spec.alpha1).sin().max(0.0);
        for (st, &t) in self.stages.iter().zip(&angles[1..]) {
            v *= st.eval(t).max(0.0);
        }
        Ok(v)
    }

    /// `ω'` at the direction of `x' ∈ R^k \ {0}`.
    pub fn omega_prime_at(&self, xp: &[f64]) -> Result<f64> {
        if xp.len() != self.spec.k {
            return Err(Error::Domain(format!("x' needs {} coordinates", self.spec.k)));
        }
        let (r, angles) = cartesian_to_spherical(xp)?;
        if r == 0.0 {
            return Err(Error::Singularity("x' = 0 lies on the edge".into()));
        }
        self.omega_prime(&angles)
    }

    /// Whether `x' ≠ 0` points into the closed opening.
    pub fn contains_direction(&self, xp: &[f64]) -> bool {
        match cartesian_to_spherical(xp) {
            Ok((r, angles)) => r > 0.0 && self.spec.in_closed_opening(&angles),
            Err(_) => false,
        }
    }

    /// Assembled eigenfunction on `S_A`:
    /// `ω(σ) = (sinθ_{N-1} … sinθ_k)^{κ+} ω'(θ_1..θ_{k-1})`.
    pub fn omega(&self, kappa_plus: f64, sigma: &[f64]) -> Result<f64> {
        let n = self.spec.n;
        let k = self.spec.k;
        if sigma.len() != n - 1 {
            return Err(Error::Domain(format!("expected {} angles, got {}", n - 1, sigma.len())));
        }
        let expect = kappa_from_gamma(k, self.gamma)?;
        if (expect - kappa_plus).abs() > 1e-8 * expect.max(1.0) {
            return Err(Error::Domain(format!(
                "κ+ = {kappa_plus} is inconsistent with γ = {} (expected {expect})",
                self.gamma
            )));
        }
        let mut v = self.omega_prime(&sigma[..k - 1])?;
        for &t in &sigma[k - 1..] {
            if !(0.0..=PI).contains(&t) {
                return Err(Error::Domain(format!("polar angle {t} outside [0, π]")));
            }
            v *= t.sin().powf(kappa_plus);
        }
        Ok(v)
    }
}

/// `γ` of the opening: `(π/α_1)²` for `k = 2`, otherwise the chained result.
pub fn gamma_first_eigenvalue(spec: &WedgeSpec, tol: f64) -> Result<f64> {
    let spec = validate_wedge(spec)?;
    if spec.k == 2 {
        return Ok((PI / spec.alpha1).powi(2));
    }
    Ok(OpeningEigen::compute(&spec, tol)?.gamma)
}

/// `ω` on `S_A` at `σ`; recomputes the chain, so prefer [`OpeningEigen`] in loops.
pub fn omega_sa(spec: &WedgeSpec, kappa_plus: f64, sigma: &[f64], tol: f64) -> Result<f64> {
    OpeningEigen::compute(spec, tol)?.omega(kappa_plus, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_second_derivative() {
        let r = sl_eigen_1d(&SlProblem::dirichlet(0.0, PI / 2.0, 0, 0.0), 1e-10).unwrap();
        assert!((r.gamma - 4.0).abs() < 4e-10, "{}", r.gamma);
        for &(t, f) in r.samples.iter().step_by(97) {
            assert!((f - (2.0 * t).sin()).abs() < 1e-8, "θ={t} f={f}");
        }
    }

    #[test]
    fn octant_stage() {
        let p = SlProblem { a: 0.0, b: PI / 2.0, d: 1, mu: 4.0, left: Endpoint::BoundedPole, right: Endpoint::Dirichlet };
        let r = sl_eigen_1d(&p, 1e-10).unwrap();
        assert!((r.gamma - 12.0).abs() < 1e-8, "{}", r.gamma);
        // f ∝ sin²θ cosθ, whose max is 2/(3√3) at tanθ = √2.
        let c = 3.0 * 3f64.sqrt() / 2.0;
        for &(t, f) in r.samples.iter().step_by(101) {
            let exact = c * t.sin().powi(2) * t.cos();
            assert!((f - exact).abs() < 1e-7, "θ={t} f={f} exact={exact}");
        }
    }

    #[test]
    fn rejects_singular_pole_without_mode() {
        let p = SlProblem::dirichlet(0.0, 1.0, 1, 0.0);
        assert!(matches!(sl_eigen_1d(&p, 1e-8), Err(Error::PoleEndpoint(_))));
    }

    #[test]
    fn k2_closed_form() {
        for &a in &[PI / 3.0, PI / 2.0, PI, 1.5 * PI] {
            let g = gamma_first_eigenvalue(&WedgeSpec::dihedral(3, a), 1e-8).unwrap();
            assert_eq!(g, (PI / a).powi(2));
        }
    }

    #[test]
    fn omega_examples() {
        let op = OpeningEigen::compute(&WedgeSpec::dihedral(3, PI / 2.0), 1e-8).unwrap();
        let w = op.omega(2.0, &[PI / 4.0, PI / 2.0]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        assert_eq!(op.omega(2.0, &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(op.omega(2.0, &[2.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(op.omega(2.5, &[0.5, 1.0]), Err(Error::Domain(_))));
    }
}
