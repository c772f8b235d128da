//! Martin and Poisson kernels of a wedge and the integral functionals built on
//! the kernel `(τ² + |y - z|²)^{-ν/2}`.
//!
//! For a positive atomic measure `μ = Σ w_i δ_{z_i}` on `R^m`:
//!
//! ```text
//! K_{ν,m}[μ](τ, ζ) = Σ w_i τ^{ν-m} (τ² + |ζ - z_i|²)^{-ν/2}
//! F[μ](τ)          = ∫_{R^m} (Σ w_i (τ² + |y - z_i|²)^{-ν/2})^q dy      (F^R: over B_R)
//! h_{σ,j}(τ)       = τ^{(σ+1)q+j-2} / (1+τ)^{(σ+1)q}     (j ≥ 2)
//!                  = e^{-τ} τ^{(σ+1)q-1}                  (j = 1)
//! M_{ν,s}(μ; R)    = ∫_0^R F^R(τ) τ^{(s+ν-m)q-1} dτ
//! ```
//!
//! `J^{A,R}` is `M` with `ν = N - 2 + 2κ+`, `m = N - k`, `s = 2 - (k + κ+)/q'`.
//! Near a Dirac mass `F(τ) ~ τ^{m-νq}`, so `M` of an atomic measure is finite
//! iff `s > m/q'`; below that threshold a positive inner cutoff `ε` is
//! mandatory and only the `ε`-scaling is meaningful.

use crate::exponents::{conjugate, ExponentReport};
use crate::geometry::{dist, norm, DiscreteMeasure};
use crate::quadrature::{
    geometric_breaks, integrate, integrate_breaks, integrate_breaks_soft, integrate_to_infinity,
    Estimate, QuadratureSpec,
};
use crate::spectral::OpeningEigen;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;
use std::f64::consts::PI;

/// Orders and indices of the kernel functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub nu: f64,
    pub m: usize,
    pub q: f64,
    pub s: f64,
    pub sigma: f64,
    pub j: usize,
    /// Truncation radius `R`.
    pub r: f64,
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::Domain(format!("q = {} must exceed 1", self.q)));
        }
        if !(self.nu > self.m as f64) {
            return Err(Error::Domain(format!("ν = {} must exceed m = {}", self.nu, self.m)));
        }
        if !(self.r > 0.0) {
            return Err(Error::Domain(format!("R = {} must be positive", self.r)));
        }
        Ok(())
    }

    /// Parameters of `J^{A,R}` for one stratum.
    pub fn admissibility(report: &ExponentReport, q: f64, r: f64) -> Result<Self> {
        Ok(KernelParams {
            nu: report.nu(),
            m: report.m(),
            q,
            s: report.s(q)?,
            sigma: 0.0,
            j: 1,
            r,
        })
    }
}

fn check_measure(mu: &DiscreteMeasure, m: usize) -> Result<()> {
    mu.validate()?;
    if mu.m != m {
        return Err(Error::Validation(format!("measure lives in R^{}, expected R^{m}", mu.m)));
    }
    Ok(())
}

/// `K_{ν,m}[μ](τ, ζ)` as an exact finite sum.
pub fn k_nu_m(tau: f64, zeta: &[f64], mu: &DiscreteMeasure, nu: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ = {tau} must be positive")));
    }
    check_measure(mu, zeta.len())?;
    let m = mu.m as f64;
    Ok(mu
        .atoms
        .iter()
        .map(|a| {
            let d2 = a.z.iter().zip(zeta).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            a.w * tau.powf(nu - m) * (tau * tau + d2).powf(-nu / 2.0)
        })
        .sum())
}

// ─── Martin kernel ───────────────────────────────────────────────────────────

/// Angular factor `ω'` on the opening `A ⊂ S^{k-1}`, evaluated at a direction.
pub trait AngularProfile: Sync {
    fn k(&self) -> usize;
    fn omega_prime_at(&self, xp: &[f64]) -> Result<f64>;
}

impl AngularProfile for OpeningEigen {
    fn k(&self) -> usize {
        self.spec.k
    }
    fn omega_prime_at(&self, xp: &[f64]) -> Result<f64> {
        OpeningEigen::omega_prime_at(self, xp)
    }
}

/// The half-line opening of a face (`k = 1`, `D_A = {x_1 > 0}`).
#[derive(Debug, Clone, Copy, Default)]
pub struct FaceProfile;

impl AngularProfile for FaceProfile {
    fn k(&self) -> usize {
        1
    }
    fn omega_prime_at(&self, xp: &[f64]) -> Result<f64> {
        match xp {
            [x] if *x > 0.0 => Ok(1.0),
            [x] if *x == 0.0 => Ok(0.0),
            [_] => Err(Error::Domain("x_1 < 0 lies outside the half-space".into())),
            _ => Err(Error::Domain("a face needs one normal coordinate".into())),
        }
    }
}

/// `K_A(x, z) = |x'|^{κ+} ω'(x'/|x'|) / (|x'|² + |x'' - z|²)^{(N-2+2κ+)/2}`
/// with `c_A = 1`.
pub fn martin_kernel(
    x: &[f64],
    z: &[f64],
    report: &ExponentReport,
    omega: &dyn AngularProfile,
) -> Result<f64> {
    let (n, k) = (report.n, report.k);
    if x.len() != n || z.len() != n - k || omega.k() != k {
        return Err(Error::Domain("dimension mismatch in martin_kernel".into()));
    }
    let (xp, xpp) = x.split_at(k);
    let rp = norm(xp);
    let d2 = rp * rp + xpp.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    if d2 == 0.0 {
        return Err(Error::Singularity("x coincides with the pole z".into()));
    }
    if rp == 0.0 {
        return Ok(0.0);
    }
    let w = omega.omega_prime_at(xp)?;
    Ok(rp.powf(report.kappa_plus) * w * d2.powf(-report.nu() / 2.0))
}

/// `K[μ](x) = Σ w_i K_A(x, z_i)`.
pub fn poisson_potential(
    mu: &DiscreteMeasure,
    x: &[f64],
    report: &ExponentReport,
    omega: &dyn AngularProfile,
) -> Result<f64> {
    check_measure(mu, report.m())?;
    let mut total = 0.0;
    for a in &mu.atoms {
        total += a.w * martin_kernel(x, &a.z, report, omega)?;
    }
    Ok(total)
}

// ─── F, F^R and the complement of the ball ──────────────────────────────────

/// Integration region in `R^m` for `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    Whole,
    Ball(f64),
    /// `{|y| > R}`, used for `F - F^R` without cancellation.
    Outside(f64),
}

struct Atoms {
    z: Vec<Vec<f64>>,
    w: Vec<f64>,
    nearest: f64,
}

impl Atoms {
    fn new(mu: &DiscreteMeasure) -> Self {
        let charged: Vec<_> = mu.atoms.iter().filter(|a| a.w > 0.0).collect();
        let mut nearest = f64::INFINITY;
        for (i, a) in charged.iter().enumerate() {
            for b in &charged[i + 1..] {
                nearest = nearest.min(dist(&a.z, &b.z));
            }
        }
        Atoms {
            z: charged.iter().map(|a| a.z.clone()).collect(),
            w: charged.iter().map(|a| a.w).collect(),
            nearest,
        }
    }

    fn sum(&self, tau2: f64, nu: f64, y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (z, w) in self.z.iter().zip(&self.w) {
            let d2 = z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            s += w * (tau2 + d2).powf(-nu / 2.0);
        }
        s
    }
}

/// Panel boundaries along one coordinate: every atom coordinate and
/// geometric offsets around it, restricted to `[lo, hi]`.
fn coordinate_breaks(atoms: &Atoms, axis: usize, tau: f64, split: f64, lo: f64, hi: f64) -> Vec<f64> {
    let rho = split * tau.min(atoms.nearest);
    let mut pts = vec![lo, hi];
    for z in &atoms.z {
        let c = z[axis];
        pts.push(c);
        for f in [1.0, 4.0, 16.0, 64.0] {
            pts.push(c - f * rho);
            pts.push(c + f * rho);
            pts.push(c - f * tau);
            pts.push(c + f * tau);
        }
    }
    pts.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1e-300));
    pts
}

/// `∫` over one coordinate of `g`, on `[lo, hi]` with infinite ends allowed.
fn integrate_axis<G: FnMut(f64) -> f64>(
    mut g: G,
    atoms: &Atoms,
    axis: usize,
    tau: f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let (zl, zh) = atoms
        .z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(z[axis]), b.max(z[axis])));
    let spread = if atoms.z.is_empty() { 0.0 } else { zh - zl };
    let reach = 64.0 * tau + spread + 1e-300;
    let (ilo, ihi) = (
        if lo.is_finite() { lo } else { (zl.min(0.0) - reach).min(hi) },
        if hi.is_finite() { hi } else { (zh.max(0.0) + reach).max(lo) },
    );
    let mut est = Estimate { value: 0.0, error: 0.0, evaluations: 0 };
    if ihi > ilo {
        let pts = coordinate_breaks(atoms, axis, tau, spec.split_radius, ilo, ihi);
        est = integrate_breaks(&mut g, &pts, spec)?;
    }
    let tail_scale = tau + spread + 1.0;
    if !hi.is_finite() {
        let t = integrate_to_infinity(&mut g, ihi, tail_scale, spec)?;
        est.value += t.value;
        est.error += t.error;
        est.evaluations += t.evaluations;
    }
    if !lo.is_finite() {
        let t = integrate_to_infinity(|x| g(2.0 * ilo - x), ilo, tail_scale, spec)?;
        est.value += t.value;
        est.error += t.error;
        est.evaluations += t.evaluations;
    }
    Ok(est)
}

/// Recursive integration of `(Σ …)^q` over coordinates `level..m`.
fn integrate_region(
    atoms: &Atoms,
    tau: f64,
    nu: f64,
    q: f64,
    region: Truncation,
    prefix: &mut Vec<f64>,
    m: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let level = prefix.len();
    if level == m {
        let v = atoms.sum(tau * tau, nu, prefix).powf(q);
        return Ok(Estimate { value: v, error: 0.0, evaluations: 1 });
    }
    let last = level + 1 == m;
    let (lo, hi) = match region {
        Truncation::Whole | Truncation::Outside(_) => (f64::NEG_INFINITY, f64::INFINITY),
        Truncation::Ball(r) => (-r, r),
    };
    let inner_spec = spec.inner();
    let sub_region = |y: f64| -> Option<Truncation> {
        match region {
            Truncation::Whole => Some(Truncation::Whole),
            Truncation::Ball(r) => {
                let rem = r * r - y * y;
                (rem > 0.0).then(|| Truncation::Ball(rem.sqrt()))
            }
            Truncation::Outside(r) => {
                let rem = r * r - y * y;
                Some(if rem > 0.0 { Truncation::Outside(rem.sqrt()) } else { Truncation::Whole })
            }
        }
    };
    if last {
        // Innermost coordinate: direct integrand, possibly with a hole.
        let mut buf = prefix.clone();
        buf.push(0.0);
        let mut g = |y: f64| {
            buf[level] = y;
            atoms.sum(tau * tau, nu, &buf).powf(q)
        };
        return match region {
            Truncation::Outside(r) => {
                let a = integrate_axis(&mut g, atoms, level, tau, r, f64::INFINITY, spec)?;
                let b = integrate_axis(&mut g, atoms, level, tau, f64::NEG_INFINITY, -r, spec)?;
                Ok(Estimate {
                    value: a.value + b.value,
                    error: a.error + b.error,
                    evaluations: a.evaluations + b.evaluations,
                })
            }
            _ => integrate_axis(&mut g, atoms, level, tau, lo, hi, spec),
        };
    }
    let g = |y: f64| {
        let Some(sub) = sub_region(y) else { return 0.0 };
        let mut p = prefix.clone();
        p.push(y);
        match integrate_region(atoms, tau, nu, q, sub, &mut p, m, &inner_spec) {
            Ok(e) => e.value,
            Err(Error::Accuracy { estimate, .. }) => estimate,
            Err(_) => f64::NAN,
        }
    };
    integrate_axis(g, atoms, level, tau, lo, hi, spec)
}

/// `F_{ν,m}[μ](τ)` over `R^m`, `B_R` or `{|y| > R}`.
pub fn f_nu_m(
    tau: f64,
    mu: &DiscreteMeasure,
    nu: f64,
    q: f64,
    region: Truncation,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ = {tau} must be positive")));
    }
    mu.validate()?;
    let m = mu.m;
    if !(nu * q > m as f64) && !matches!(region, Truncation::Ball(_)) {
        return Err(Error::Divergent(format!("νq = {} ≤ m = {m}: F is infinite", nu * q)));
    }
    let atoms = Atoms::new(mu);
    if atoms.w.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if m == 0 {
        let v = match region {
            Truncation::Outside(_) => 0.0,
            _ => atoms.sum(tau * tau, nu, &[]).powf(q),
        };
        return Ok(Estimate { value: v, error: 0.0, evaluations: 1 });
    }
    integrate_region(&atoms, tau, nu, q, region, &mut Vec::new(), m, spec)
}

fn soft_f(tau: f64, mu: &DiscreteMeasure, nu: f64, q: f64, region: Truncation, spec: &QuadratureSpec) -> f64 {
    match f_nu_m(tau, mu, nu, q, region, spec) {
        Ok(e) => e.value,
        Err(Error::Accuracy { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    }
}

/// `h_{σ,j}(τ)`.
pub fn h_sigma_j(tau: f64, sigma: f64, q: f64, j: usize) -> f64 {
    let a = (sigma + 1.0) * q;
    if j == 1 {
        (-tau).exp() * tau.powf(a - 1.0)
    } else {
        tau.powf(a + j as f64 - 2.0) / (1.0 + tau).powf(a)
    }
}

/// Panels for a `τ`-integral on `(lo, hi)`: geometric from the cutoff (or
/// dyadic down to `2^{-60} hi` when `lo = 0`).
fn tau_breaks(lo: f64, hi: f64) -> Vec<f64> {
    if lo > 0.0 {
        geometric_breaks(lo, hi, 2.0)
    } else {
        let mut v = vec![0.0];
        v.extend((0..=60).rev().map(|i| hi * 0.5f64.powi(i)));
        v
    }
}

/// Adds the inner-quadrature budget to an outer estimate.
fn nested(mut e: Estimate, spec: &QuadratureSpec) -> Estimate {
    e.error += spec.inner().rel_tol * e.value.abs();
    e
}

/// Exponent `p` with `F(τ) τ^{w} ~ τ^p` as `τ → 0` for a nonzero measure.
fn small_tau_power(params: &KernelParams, weight_exp: f64) -> f64 {
    params.m as f64 - params.nu * params.q + weight_exp
}

/// `M^m_{ν,s}(μ; R) = ∫_ε^R F^R(τ) τ^{(s+ν-m)q-1} dτ` with `ε = spec.inner_cutoff`.
pub fn m_nu_s(mu: &DiscreteMeasure, params: &KernelParams, spec: &QuadratureSpec) -> Result<Estimate> {
    params.validate()?;
    spec.validate()?;
    check_measure(mu, params.m)?;
    let m = params.m as f64;
    let w_exp = (params.s + params.nu - m) * params.q - 1.0;
    let eps = spec.inner_cutoff;
    if mu.is_zero() {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if eps == 0.0 && small_tau_power(params, w_exp) <= -1.0 {
        return Err(Error::Divergent(format!(
            "s = {} ≤ m/q' = {}: M of an atomic measure diverges at τ = 0; set an inner cutoff",
            params.s,
            m / conjugate(params.q)
        )));
    }
    if eps >= params.r {
        return Err(Error::Configuration(format!("cutoff {eps} must be below R = {}", params.r)));
    }
    let inner = spec.inner();
    let g = |t: f64| soft_f(t, mu, params.nu, params.q, Truncation::Ball(params.r), &inner) * t.powf(w_exp);
    // Below τ0 the atoms decouple: F^R(τ) = τ^{m-νq} F_δ(1) Σ w^q up to a
    // relative O((τ0/d)^{νq-m}) that is far below any quadrature tolerance.
    let atoms = Atoms::new(mu);
    let clearance = mu.atoms.iter().map(|a| params.r - norm(&a.z)).fold(atoms.nearest, f64::min);
    let tau0 = 1e-6 * clearance;
    if params.nu * params.q > m && clearance > 0.0 && eps < tau0 {
        let unit = DiscreteMeasure::dirac(vec![0.0; params.m], 1.0);
        let c = f_nu_m(1.0, &unit, params.nu, params.q, Truncation::Whole, &inner)?.value;
        let mass_q: f64 = mu.atoms.iter().map(|a| a.w.powf(params.q)).sum();
        let p = small_tau_power(params, w_exp);
        let near = if (p + 1.0).abs() < 1e-12 {
            (tau0 / eps).ln()
        } else {
            (tau0.powf(p + 1.0) - if eps > 0.0 { eps.powf(p + 1.0) } else { 0.0 }) / (p + 1.0)
        };
        let mut est = nested(integrate_breaks(g, &geometric_breaks(tau0, params.r, 2.0), spec)?, spec);
        est.value += c * mass_q * near;
        est.error += inner.rel_tol * (c * mass_q * near).abs();
        return Ok(est);
    }
    Ok(nested(integrate_breaks(g, &tau_breaks(eps, params.r), spec)?, spec))
}

/// Checks `(s + ν - m)q - 1 = (q+1)κ+ + k - 1` for a stratum.
pub fn exponent_identity(report: &ExponentReport, q: f64) -> Result<(f64, f64)> {
    let s = report.s(q)?;
    let lhs = (s + report.nu() - report.m() as f64) * q - 1.0;
    let rhs = report.beta(q);
    Ok((lhs, rhs))
}

/// `J^{A,R}(μ)`, the admissibility functional of an edge measure.
pub fn j_ar(
    mu: &DiscreteMeasure,
    report: &ExponentReport,
    r: f64,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let (lhs, rhs) = exponent_identity(report, q)?;
    if (lhs - rhs).abs() > 1e-12 * rhs.abs().max(1.0) {
        return Err(Error::Validation(format!("exponent identity violated: {lhs} ≠ {rhs}")));
    }
    let params = KernelParams::admissibility(report, q, r)?;
    m_nu_s(mu, &params, spec)
}

/// Reduced form `∫_ε^∞ F(τ) h_{σ,j}(τ) dτ`.
pub fn reduced_i(mu: &DiscreteMeasure, params: &KernelParams, spec: &QuadratureSpec) -> Result<Estimate> {
    params.validate()?;
    check_measure(mu, params.m)?;
    let a = (params.sigma + 1.0) * params.q;
    let inner = spec.inner();
    let g = |t: f64| soft_f(t, mu, params.nu, params.q, Truncation::Whole, &inner) * h_sigma_j(t, params.sigma, params.q, params.j);
    let w_exp = a + params.j as f64 - 2.0;
    tau_integral_to_infinity(mu, params, w_exp, spec, g)
}

fn tau_integral_to_infinity<G: FnMut(f64) -> f64>(
    mu: &DiscreteMeasure,
    params: &KernelParams,
    w_exp: f64,
    spec: &QuadratureSpec,
    mut g: G,
) -> Result<Estimate> {
    if mu.is_zero() {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let eps = spec.inner_cutoff;
    if eps == 0.0 && small_tau_power(params, w_exp) <= -1.0 {
        return Err(Error::Divergent("integrand not integrable at τ = 0; set an inner cutoff".into()));
    }
    let top = 64.0 * (1.0 + mu.diameter() + mu.radius());
    let mut e = integrate_breaks(&mut g, &tau_breaks(eps, top), spec)?;
    let t = integrate_to_infinity(&mut g, top, top, spec)?;
    e.value += t.value;
    e.error += t.error;
    e.evaluations += t.evaluations;
    Ok(nested(e, spec))
}

/// Surface area of the unit sphere `S^{d-1} ⊂ R^d` (`d ≥ 1`).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_fn(d as f64 / 2.0)
}

/// `I^{m,j}_{ν,σ}(μ)` integrated over `(y_1, |ỹ|)` in polar form
/// `y_1 = τ cos φ`, `|ỹ| = τ sin φ`; `j = 1` is the one-variable integral.
pub fn i_m_j(mu: &DiscreteMeasure, params: &KernelParams, spec: &QuadratureSpec) -> Result<Estimate> {
    params.validate()?;
    check_measure(mu, params.m)?;
    let a = (params.sigma + 1.0) * params.q;
    let inner = spec.inner();
    let fq = |t: f64| soft_f(t, mu, params.nu, params.q, Truncation::Whole, &inner);
    if params.j == 1 {
        let g = |y1: f64| fq(y1) * (-y1).exp() * y1.powf(a - 1.0);
        return tau_integral_to_infinity(mu, params, a - 1.0, spec, g);
    }
    let j = params.j;
    let c = sphere_area(j - 1);
    let angular = |t: f64| {
        let h = |phi: f64| {
            let (sn, cs) = phi.sin_cos();
            (-t * cs).exp() * (t * cs).powf(a - 1.0) * (t * sn).powi(j as i32 - 2)
        };
        integrate_breaks_soft(h, &[0.0, 0.25 * PI, 0.4 * PI, 0.5 * PI], &inner)
    };
    let g = |t: f64| c * fq(t) * t * angular(t);
    tau_integral_to_infinity(mu, params, a + j as f64 - 2.0, spec, g)
}

/// `∫_a^b F(τ) h(τ) dτ` for the region/weight pair used by remainder checks.
pub fn f_weighted_integral(
    mu: &DiscreteMeasure,
    params: &KernelParams,
    region: Truncation,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    params.validate()?;
    check_measure(mu, params.m)?;
    let inner = spec.inner();
    let g = |t: f64| soft_f(t, mu, params.nu, params.q, region, &inner) * h_sigma_j(t, params.sigma, params.q, params.j);
    if b.is_finite() {
        let pts = if a > 0.0 { geometric_breaks(a, b, 2.0) } else { tau_breaks(0.0, b) };
        Ok(nested(integrate_breaks(g, &pts, spec)?, spec))
    } else {
        Ok(nested(integrate_to_infinity(g, a, a.max(1.0), spec)?, spec))
    }
}

/// Convenience single-interval quadrature re-export for callers of this module.
pub fn integrate_tau<G: FnMut(f64) -> f64>(g: G, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate(g, a, b, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::critical_exponents;
    use crate::geometry::{Atom, WedgeSpec};

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure {
            m: 1,
            atoms: vec![Atom { z: vec![-1.0], w: 1.0 }, Atom { z: vec![1.0], w: 1.0 }],
        }
    }

    #[test]
    fn k_nu_m_examples() {
        let d0 = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0);
        let v = k_nu_m(0.7, &[0.0, 0.0], &d0, 3.5).unwrap();
        assert!((v - 0.7f64.powi(-2)).abs() < 1e-13);
        let t = 3.0;
        let a = k_nu_m(0.4 * t, &[0.3 * t, -0.2 * t], &d0, 3.5).unwrap();
        let b = k_nu_m(0.4, &[0.3, -0.2], &d0, 3.5).unwrap();
        assert!((a - b / (t * t)).abs() < 1e-14 * b);
        assert!((k_nu_m(1.0, &[0.0], &two_atoms(), 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(k_nu_m(0.0, &[0.0], &two_atoms(), 2.0).is_err());
    }

    #[test]
    fn f_arctan_oracle() {
        let d0 = DiscreteMeasure::dirac(vec![0.0], 1.0);
        let spec = QuadratureSpec::with_tol(1e-9);
        for &tau in &[0.01, 0.3, 2.0] {
            let f = f_nu_m(tau, &d0, 2.0, 1.0 + 1e-12, Truncation::Whole, &spec).unwrap();
            assert!((f.value / (PI / tau) - 1.0).abs() < 1e-8, "τ={tau}: {}", f.value);
        }
    }

    #[test]
    fn martin_kernel_homogeneity_and_edge_value() {
        let op = OpeningEigen::compute(&WedgeSpec::dihedral(3, PI / 2.0), 1e-8).unwrap();
        let rep = critical_exponents(3, 2, op.gamma).unwrap();
        let x = [0.3, 0.5, 0.2];
        let z = [-0.4];
        let k1 = martin_kernel(&x, &z, &rep, &op).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let k2 = martin_kernel(&x2, &[-0.8], &rep, &op).unwrap();
        assert!((k2 / k1 - 2f64.powf(2.0 - 3.0 - 2.0)).abs() < 1e-12);
        let xe = [0.3, 0.4, 0.0];
        let v = martin_kernel(&xe, &[0.0], &rep, &op).unwrap();
        let w = op.omega_prime_at(&xe[..2]).unwrap();
        assert!((v - w * 0.5f64.powf(2.0 - 3.0 - 2.0)).abs() < 1e-12);
        assert!(matches!(martin_kernel(&[0.0, 0.0, 0.1], &[0.1], &rep, &op), Err(Error::Singularity(_))));
    }
}
