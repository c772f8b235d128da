//! Besov norms: a Poisson-extension proxy for negative order on measures, and
//! difference-quotient norms of positive order on sampled functions.
//!
//! The negative-order proxy of `μ` on `R^m` (`n = m + 1`) is
//!
//! ```text
//! I_ε(μ) = ∫_{y_1 > ε} |P_n[μ](y)|^q e^{-y_1} y_1^{sq-1} dy
//!        = γ_n^q ∫_ε^∞ F_{n,m}[μ](τ) e^{-τ} τ^{(s+1)q-1} dτ,   γ_n = Γ(n/2)/π^{n/2},
//! ```
//!
//! where `P_n` is the half-space Poisson kernel. It is finite at `ε = 0` for an
//! atomic measure iff `s > m/q'`.

use crate::fit::{loglog_fit, LineFit};
use crate::geometry::DiscreteMeasure;
use crate::kernels::{f_nu_m, sphere_area, Truncation};
use crate::quadrature::{geometric_breaks, integrate_breaks, integrate_to_infinity, QuadratureSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;
use std::f64::consts::PI;

/// Slope below which the cutoff scaling is declared divergent.
pub const DIVERGENCE_SLOPE: f64 = -0.1;
/// Minimum `R²` of the cutoff fit for a divergence verdict.
pub const DIVERGENCE_R2: f64 = 0.99;
/// Largest accepted relative change against the 2× subsampled grid.
pub const RESOLUTION_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProxyResult {
    pub value: f64,
    pub cutoff: f64,
    pub divergent: bool,
    /// Fitted `d ln I_ε / d ln ε` over `ε, ε/2, ε/4, ε/8`.
    pub exponent: f64,
    pub exponent_ci: (f64, f64),
    pub r_squared: f64,
    /// `(ε_i, I_{ε_i})`.
    pub samples: Vec<(f64, f64)>,
}

/// `Γ(n/2)/π^{n/2}`, the constant of the half-space Poisson kernel in `R^n`.
pub fn poisson_constant(n: usize) -> f64 {
    gamma_fn(n as f64 / 2.0) / PI.powf(n as f64 / 2.0)
}

/// `I_ε(μ)` at a single cutoff.
pub fn besov_neg_integral(mu: &DiscreteMeasure, s: f64, q: f64, eps: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("cutoff ε = {eps} must lie in (0, 1)")));
    }
    mu.validate()?;
    if mu.is_zero() {
        return Ok(0.0);
    }
    let n = mu.m + 1;
    let nu = n as f64;
    let inner = spec.inner();
    let a = (s + 1.0) * q - 1.0;
    let g = |t: f64| {
        let f = match f_nu_m(t, mu, nu, q, Truncation::Whole, &inner) {
            Ok(e) => e.value,
            Err(Error::Accuracy { estimate, .. }) => estimate,
            Err(_) => f64::NAN,
        };
        f * (-t).exp() * t.powf(a)
    };
    let top = 64.0 * (1.0 + mu.diameter() + mu.radius());
    let body = integrate_breaks(g, &geometric_breaks(eps, top, 2.0), spec)?;
    let tail = integrate_to_infinity(g, top, 1.0, spec)?;
    Ok(poisson_constant(n).powf(q) * (body.value + tail.value))
}

/// Proxy for `‖μ‖^q_{B^{-s,q}}` with the cutoff-scaling divergence test.
pub fn besov_neg_proxy(mu: &DiscreteMeasure, s: f64, q: f64, eps: f64, spec: &QuadratureSpec) -> Result<NormProxyResult> {
    let cutoffs: Vec<f64> = (0..4).map(|i| eps / f64::powi(2.0, i)).collect();
    let values = cutoffs
        .par_iter()
        .map(|&e| besov_neg_integral(mu, s, q, e, spec))
        .collect::<Result<Vec<f64>>>()?;
    let samples: Vec<(f64, f64)> = cutoffs.iter().copied().zip(values.iter().copied()).collect();
    let value = values[0];
    if value == 0.0 {
        return Ok(NormProxyResult {
            value,
            cutoff: eps,
            divergent: false,
            exponent: 0.0,
            exponent_ci: (0.0, 0.0),
            r_squared: 1.0,
            samples,
        });
    }
    let LineFit { slope, slope_ci, r_squared, .. } = loglog_fit(&cutoffs, &values)?;
    Ok(NormProxyResult {
        value,
        cutoff: eps,
        divergent: slope < DIVERGENCE_SLOPE && r_squared > DIVERGENCE_R2,
        exponent: slope,
        exponent_ci: slope_ci,
        r_squared,
        samples,
    })
}

// ─── positive order ─────────────────────────────────────────────────────────

/// Samples of a compactly supported function on a uniform grid, zero outside.
/// `values` is row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub dims: Vec<usize>,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, h: f64, values: Vec<f64>) -> Result<Self> {
        let g = GridFunction { dims, h, values };
        g.validate()?;
        Ok(g)
    }

    /// Samples `f` at `origin + h·i` for every multi-index `i < dims`.
    pub fn sample<F: Fn(&[f64]) -> f64>(dims: Vec<usize>, h: f64, origin: &[f64], f: F) -> Self {
        let total: usize = dims.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; dims.len()];
        for flat in 0..total {
            let idx = unflatten(flat, &dims);
            for (d, i) in idx.iter().enumerate() {
                x[d] = origin[d] + h * *i as f64;
            }
            values.push(f(&x));
        }
        GridFunction { dims, h, values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::Validation("grid needs at least one point per axis".into()));
        }
        if !(self.h > 0.0) {
            return Err(Error::Validation(format!("grid spacing {} must be positive", self.h)));
        }
        if self.values.len() != self.dims.iter().product::<usize>() {
            return Err(Error::Validation("values do not match grid dimensions".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite grid value".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    fn get(&self, idx: &[isize]) -> f64 {
        let mut flat = 0usize;
        for (d, &i) in idx.iter().enumerate() {
            if i < 0 || i as usize >= self.dims[d] {
                return 0.0;
            }
            flat = flat * self.dims[d] + i as usize;
        }
        self.values[flat]
    }

    pub fn scaled(&self, t: f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| t * v).collect(), ..self.clone() }
    }

    /// Every other sample on each axis, spacing `2h`.
    pub fn subsampled(&self) -> Self {
        let dims: Vec<usize> = self.dims.iter().map(|d| d.div_ceil(2)).collect();
        let total: usize = dims.iter().product();
        let values = (0..total)
            .map(|flat| {
                let idx: Vec<isize> = unflatten(flat, &dims).iter().map(|&i| 2 * i as isize).collect();
                self.get(&idx)
            })
            .collect();
        GridFunction { dims, h: 2.0 * self.h, values }
    }

    fn lp_power(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.h.powi(self.dim() as i32)
    }

    /// Central-difference partial derivative along `axis`, on a grid padded by one cell.
    fn derivative(&self, axis: usize) -> GridFunction {
        let dims: Vec<usize> = self.dims.iter().map(|d| d + 2).collect();
        let total: usize = dims.iter().product();
        let values = (0..total)
            .map(|flat| {
                let idx: Vec<isize> = unflatten(flat, &dims).iter().map(|&i| i as isize - 1).collect();
                let mut up = idx.clone();
                let mut dn = idx;
                up[axis] += 1;
                dn[axis] -= 1;
                (self.get(&up) - self.get(&dn)) / (2.0 * self.h)
            })
            .collect();
        GridFunction { dims, h: self.h, values }
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for d in (0..dims.len()).rev() {
        idx[d] = flat % dims[d];
        flat /= dims[d];
    }
    idx
}

/// Mean of `|cos θ|^p` over `S^{ℓ-1}`.
fn cos_moment(l: usize, p: f64) -> f64 {
    let lf = l as f64;
    gamma_fn(lf / 2.0) * gamma_fn((p + 1.0) / 2.0) / (PI.sqrt() * gamma_fn((lf + p) / 2.0))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Difference {
    First,
    Second,
}

/// `∫∫ |Δ^k_y f(x)|^p |y|^{-ℓ-sp} dx dy` on the lattice. Pairs inside the
/// sample box are summed directly; pairs with one point outside reduce to
/// `|f(x)|^p` times the lattice weight outside the box, whose far part
/// (`|y| > 4·extent`) is added in closed form.
fn difference_seminorm(f: &GridFunction, s: f64, p: f64, order: Difference) -> f64 {
    let l = f.dim();
    let lf = l as f64;
    let h = f.h;
    let sp = s * p;
    let cell = h.powi(l as i32);
    let weight = |y: &[isize]| {
        let n2: isize = y.iter().map(|v| v * v).sum();
        ((n2 as f64).sqrt() * h).powf(-lf - sp) * cell
    };
    // Total lattice weight Σ_{y ≠ 0} w(y).
    let far = 4 * *f.dims.iter().max().unwrap_or(&1) as isize;
    let side = (2 * far + 1) as usize;
    let lattice: f64 = (0..side.pow(l as u32))
        .into_par_iter()
        .map(|flat| {
            let y: Vec<isize> = unflatten(flat, &vec![side; l]).iter().map(|&i| i as isize - far).collect();
            let n2: isize = y.iter().map(|v| v * v).sum();
            if n2 == 0 || n2 > far * far { 0.0 } else { weight(&y) }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let area = sphere_area(l);
    let total_weight = lattice + area * (far as f64 * h).powf(-sp) / sp;
    // Diagonal cell `|y| < ρ` with the volume of one lattice cell.
    let rho = h * (gamma_fn(lf / 2.0 + 1.0) / PI.powf(lf / 2.0)).powf(1.0 / lf);
    let span: Vec<usize> = f.dims.iter().map(|d| 2 * d - 1).collect();
    let n_span: usize = span.iter().product();
    let n_grid = f.values.len();
    let partial: Vec<f64> = (0..n_grid)
        .into_par_iter()
        .map(|flat| {
            let x: Vec<isize> = unflatten(flat, &f.dims).iter().map(|&i| i as isize).collect();
            let inside = |z: &[isize]| z.iter().zip(&f.dims).all(|(&v, &d)| v >= 0 && (v as usize) < d);
            let fx = f.get(&x);
            let mut acc = 0.0;
            let mut covered = 0.0;
            let mut covered_plus = 0.0;
            let mut up = x.clone();
            let mut dn = x.clone();
            let mut y = vec![0isize; l];
            for yf in 0..n_span {
                for (d, i) in unflatten(yf, &span).into_iter().enumerate() {
                    y[d] = i as isize - (f.dims[d] as isize - 1);
                    up[d] = x[d] + y[d];
                    dn[d] = x[d] - y[d];
                }
                if y.iter().all(|&v| v == 0) {
                    continue;
                }
                let (iu, id) = (inside(&up), inside(&dn));
                let diff = match order {
                    Difference::First if iu => f.get(&up) - fx,
                    Difference::Second if iu || id => f.get(&up) + f.get(&dn) - 2.0 * fx,
                    _ => continue,
                };
                let w = weight(&y);
                if iu {
                    covered_plus += w;
                }
                covered += w;
                if diff != 0.0 {
                    acc += diff.abs().powf(p) * w;
                }
            }
            let fp = fx.abs().powf(p);
            // y with every partner outside the box, then the mirrored pairs
            // whose base point lies outside.
            let outside = match order {
                Difference::First => 2.0 * fp * (total_weight - covered),
                Difference::Second => {
                    2f64.powf(p) * fp * (total_weight - covered) + 2.0 * fp * (total_weight - covered_plus)
                }
            };
            let near = match order {
                Difference::First => {
                    let mut g2 = 0.0;
                    for d in 0..l {
                        up.copy_from_slice(&x);
                        dn.copy_from_slice(&x);
                        up[d] += 1;
                        dn[d] -= 1;
                        g2 += ((f.get(&up) - f.get(&dn)) / (2.0 * h)).powi(2);
                    }
                    g2.powf(p / 2.0) * cos_moment(l, p) * area * rho.powf(p - sp) / (p - sp)
                }
                Difference::Second => {
                    let mut lap = 0.0;
                    for d in 0..l {
                        up.copy_from_slice(&x);
                        dn.copy_from_slice(&x);
                        up[d] += 1;
                        dn[d] -= 1;
                        lap += (f.get(&up) + f.get(&dn) - 2.0 * fx) / (h * h);
                    }
                    (lap / lf).abs().powf(p) * area * rho.powf(2.0 * p - sp) / (2.0 * p - sp)
                }
            };
            (acc + outside + near) * cell
        })
        .collect();
    partial.iter().sum()
}

fn pos_norm_power(f: &GridFunction, s: f64, p: f64) -> f64 {
    if s < 1.0 {
        f.lp_power(p) + difference_seminorm(f, s, p, Difference::First)
    } else if s == 1.0 {
        f.lp_power(p) + difference_seminorm(f, 1.0, p, Difference::Second)
    } else {
        let mut total = f.lp_power(p);
        for d in 0..f.dim() {
            let g = f.derivative(d);
            total += g.lp_power(p) + difference_seminorm(&g, s - 1.0, p, Difference::First);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosNormResult {
    pub value: f64,
    /// Relative change against the 2× subsampled grid.
    pub resolution_delta: f64,
}

fn check_pos_args(f: &GridFunction, s: f64, p: f64, upper: f64) -> Result<()> {
    f.validate()?;
    if !(s > 0.0 && s < upper) {
        return Err(Error::Domain(format!("s = {s} must lie in (0, {upper})")));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p = {p} must be at least 1")));
    }
    Ok(())
}

fn with_resolution<N: Fn(&GridFunction) -> f64>(f: &GridFunction, norm: N) -> Result<PosNormResult> {
    let value = norm(f);
    let coarse = norm(&f.subsampled());
    let resolution_delta = if value == 0.0 { 0.0 } else { (coarse - value).abs() / value };
    if resolution_delta >= RESOLUTION_LIMIT {
        return Err(Error::Resolution { delta: resolution_delta });
    }
    Ok(PosNormResult { value, resolution_delta })
}

/// `‖f‖_{B^{s,p}}`: Gagliardo norm for `s ∈ (0,1)`, second-difference norm at
/// `s = 1`, `W^{1,p}` plus the Gagliardo seminorm of `∇f` for `s ∈ (1,2)`.
pub fn besov_pos_norm(f: &GridFunction, s: f64, p: f64) -> Result<PosNormResult> {
    check_pos_args(f, s, p, 2.0)?;
    with_resolution(f, |g| pos_norm_power(g, s, p).powf(1.0 / p))
}

/// The second-difference construction `‖f‖_p + (∫∫ |Δ²_y f|^p |y|^{-ℓ-sp})^{1/p}`
/// for `s ∈ (0, 2)`.
pub fn second_difference_norm(f: &GridFunction, s: f64, p: f64) -> Result<PosNormResult> {
    check_pos_args(f, s, p, 2.0)?;
    with_resolution(f, |g| (g.lp_power(p) + difference_seminorm(g, s, p, Difference::Second)).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent(n: usize) -> GridFunction {
        let h = 4.0 / n as f64;
        GridFunction::sample(vec![n + 1], h, &[-2.0], |x| (1.0 - x[0].abs()).max(0.0))
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let f = GridFunction::new(vec![11], 0.1, vec![0.0; 11]).unwrap();
        assert_eq!(besov_pos_norm(&f, 0.5, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn homogeneous_of_degree_one() {
        let f = tent(200);
        let a = besov_pos_norm(&f, 0.5, 2.0).unwrap().value;
        let b = besov_pos_norm(&f.scaled(-3.0), 0.5, 2.0).unwrap().value;
        assert!((b / a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tent_matches_finer_grid() {
        let coarse = besov_pos_norm(&tent(200), 0.5, 2.0).unwrap().value;
        let fine = besov_pos_norm(&tent(400), 0.5, 2.0).unwrap().value;
        assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse} vs {fine}");
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let f = GridFunction::sample(vec![5], 1.0, &[-2.0], |x| (1.0 - x[0].abs()).max(0.0));
        assert!(matches!(besov_pos_norm(&f, 1.5, 2.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn poisson_constant_values() {
        assert!((poisson_constant(2) - 1.0 / PI).abs() < 1e-15);
        assert!((poisson_constant(3) - 0.5 / PI).abs() < 1e-15);
    }
}
