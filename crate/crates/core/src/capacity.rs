//! Bessel kernels, discretized Bessel capacities and the ρ-capacity of a
//! compact subset of an edge.
//!
//! `C_{α,p}(K)` is approximated by the convex program
//!
//! ```text
//! min Σ_j v_j g_j^p   over g ≥ 0 piecewise constant on a source mesh,
//! subject to (G_α * g)(x) ≥ 1 for every x ∈ K,
//! ```
//!
//! solved through its concave dual in the multipliers `λ_x ≥ 0`. The source
//! mesh is graded geometrically towards each point of `K`, so refining it
//! exposes the `h^{αp-ℓ}` decay of the capacity of a point when `αp < ℓ`.
//! Restricting to a subspace of sources makes every discrete value an upper
//! bound; successive meshes are nested, so the history is nonincreasing.

use crate::exponents::ExponentReport;
use crate::geometry::{norm, Atom, DiscreteMeasure, PieceShape};
use crate::kernels::j_ar;
use crate::quadrature::{integrate_breaks, QuadratureSpec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::{gamma as gamma_fn, gamma_li};
use std::f64::consts::PI;

/// Below this value at the finest resolution a decreasing history is "vanishing".
pub const VANISHING_THRESHOLD: f64 = 1e-2;
/// Minimum decrease factor per refinement for a "vanishing" verdict.
pub const VANISHING_RATIO: f64 = 1.5;
/// Largest relative change of the last refinement for a "positive" verdict.
pub const STABLE_CHANGE: f64 = 0.1;
/// Relative duality gap of the discrete program.
pub const SOLVER_GAP: f64 = 1e-6;
/// Radius, in units of the kernel decay length, of the source region around `K`.
pub const SOURCE_REACH: f64 = 3.0;
/// Decades of grading added by each refinement.
pub const DECADES_PER_REFINEMENT: u32 = 2;
/// Cutoffs probed by [`rho_capacity`].
pub const RHO_CUTOFFS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityVerdict {
    Positive,
    Vanishing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    /// Finest mesh size (Bessel) or inner cutoff (ρ-capacity).
    pub resolution: f64,
    /// `(resolution, value)`, coarsest first.
    pub history: Vec<(f64, f64)>,
    pub verdict: CapacityVerdict,
    /// Relative duality gap (Bessel) or optimality gap (ρ) at the finest resolution.
    pub gap: f64,
}

/// Verdict of a refinement history, coarsest first.
pub fn refinement_verdict(values: &[f64]) -> CapacityVerdict {
    let Some(&last) = values.last() else { return CapacityVerdict::Inconclusive };
    if values.iter().all(|&v| v == 0.0) {
        return CapacityVerdict::Vanishing;
    }
    if values.len() >= 3
        && last < VANISHING_THRESHOLD
        && values.windows(2).all(|w| w[1] > 0.0 && w[0] / w[1] >= VANISHING_RATIO)
    {
        return CapacityVerdict::Vanishing;
    }
    if values.len() >= 2 && last >= VANISHING_THRESHOLD {
        let prev = values[values.len() - 2];
        if (prev - last).abs() <= STABLE_CHANGE * last {
            return CapacityVerdict::Positive;
        }
    }
    CapacityVerdict::Inconclusive
}

// ─── Bessel kernel ──────────────────────────────────────────────────────────

fn kernel_constant(alpha: f64) -> f64 {
    1.0 / ((4.0 * PI).powf(alpha / 2.0) * gamma_fn(alpha / 2.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("α = {alpha} must be positive")));
    }
    Ok(())
}

/// `G_α(x) = c ∫_0^∞ t^{(α-ℓ)/2} e^{-π|x|²/t - t/(4π)} dt/t`,
/// `c = (4π)^{-α/2}/Γ(α/2)`.
pub fn bessel_kernel(x: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let l = x.len() as f64;
    let r = norm(x);
    let a = (alpha - l) / 2.0;
    let b = PI * r * r;
    let c = 1.0 / (4.0 * PI);
    if b == 0.0 {
        if a <= 0.0 {
            return Err(Error::Singularity(format!("G_α(0) is infinite for α = {alpha} ≤ ℓ = {l}")));
        }
        return Ok(kernel_constant(alpha) * gamma_fn(a) * (4.0 * PI).powf(a));
    }
    // Concave exponent g(u) = a u - b e^{-u} - c e^u of the integrand in u = ln t.
    let g = |u: f64| a * u - b * (-u).exp() - c * u.exp();
    let peak = ((a + (a * a + 4.0 * b * c).sqrt()) / (2.0 * c)).ln();
    let top = g(peak);
    let reach = |dir: f64| {
        let mut step = 1.0;
        while g(peak + dir * step) > top - 60.0 {
            step *= 2.0;
        }
        peak + dir * step
    };
    let (lo, hi) = (reach(-1.0), reach(1.0));
    let n = 16;
    let pts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let spec = QuadratureSpec { rel_tol: 1e-13, ..QuadratureSpec::default() };
    let est = integrate_breaks(|u| (g(u) - top).exp(), &pts, &spec)?;
    Ok(kernel_constant(alpha) * top.exp() * est.value)
}

/// `erf(hi) - erf(lo)` without cancellation: Gauss-Legendre on narrow
/// intervals, complementary functions in the tails.
fn erf_diff(lo: f64, hi: f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    if hi - lo < 0.25 {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let sum: f64 = X.iter().zip(W).map(|(x, w)| w * (-(c + h * x).powi(2)).exp()).sum();
        return 2.0 / PI.sqrt() * h * sum;
    }
    if lo >= 1.0 {
        erfc(lo) - erfc(hi)
    } else if hi <= -1.0 {
        erfc(-hi) - erfc(-lo)
    } else {
        erf(hi) - erf(lo)
    }
}

/// `∫_{cell} G_α(x - y) dy` for an axis-aligned cell `[lo, hi]`.
///
/// Subordination turns the cell integral into a one-dimensional integral of a
/// product of error functions.
pub fn cell_integral(x: &[f64], lo: &[f64], hi: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let l = x.len();
    let mut dists: Vec<f64> = Vec::with_capacity(2 * l + 2);
    let mut interior = 1.0;
    for d in 0..l {
        let (a, b) = (lo[d] - x[d], hi[d] - x[d]);
        for e in [a.abs(), b.abs(), b - a] {
            if e > 0.0 {
                dists.push(e);
            }
        }
        interior *= if a < 0.0 && b > 0.0 {
            2.0
        } else if a == 0.0 || b == 0.0 {
            1.0
        } else {
            0.0
        };
    }
    let dmin = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let integrand = |u: f64| {
        let s = u.exp();
        let k = (PI / s).sqrt();
        let mut prod = 1.0;
        for d in 0..l {
            prod *= erf_diff((lo[d] - x[d]) * k, (hi[d] - x[d]) * k);
            if prod == 0.0 {
                return 0.0;
            }
        }
        (alpha / 2.0 * u - s / (4.0 * PI)).exp() * prod
    };
    let u0 = (PI * dmin * dmin / 40.0).ln().min(-1.0);
    let u1 = (4.0 * PI * 80.0f64).ln();
    let mut pts = vec![u0, u1];
    for d in &dists {
        let u = (PI * d * d).ln();
        if u > u0 && u < u1 {
            pts.push(u);
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-18, max_subdivisions: 400, ..QuadratureSpec::default() };
    let body = match integrate_breaks(integrand, &pts, &spec) {
        Ok(e) => e.value,
        // Round-off floor on tiny cells.
        Err(Error::Accuracy { estimate, error }) if error <= 1e-7 * estimate.abs() + 1e-16 => estimate,
        Err(e) => return Err(e),
    };
    // Below u0 every error-function factor has reached its limit.
    let tail = interior * (4.0 * PI).powf(alpha / 2.0) * gamma_li(alpha / 2.0, u0.exp() / (4.0 * PI));
    Ok(kernel_constant(alpha) / 2f64.powi(l as i32) * (body + tail))
}

// ─── discrete Bessel capacity ───────────────────────────────────────────────

/// Boundaries of the graded mesh on one axis for the coordinates `centers`.
fn axis_breaks(centers: &[f64], decades: u32, per_decade: u32) -> Vec<f64> {
    let h_min = 10f64.powi(-(decades as i32));
    let mut pts = Vec::new();
    let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - SOURCE_REACH;
    let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + SOURCE_REACH;
    pts.push(lo);
    pts.push(hi);
    for &c in centers {
        let mut i = 0;
        loop {
            let r = h_min * 10f64.powf(i as f64 / per_decade as f64);
            if r >= SOURCE_REACH {
                break;
            }
            pts.push(c - r);
            pts.push(c + r);
            i += 1;
        }
    }
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts
}

struct Mesh {
    lo: Vec<Vec<f64>>,
    hi: Vec<Vec<f64>>,
    vol: Vec<f64>,
}

fn tensor_mesh(k: &[Vec<f64>], decades: u32, per_decade: u32) -> Mesh {
    let l = k[0].len();
    let axes: Vec<Vec<f64>> = (0..l)
        .map(|d| axis_breaks(&k.iter().map(|x| x[d]).collect::<Vec<_>>(), decades, per_decade))
        .collect();
    let counts: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
    let total: usize = counts.iter().product();
    let mut mesh = Mesh { lo: Vec::with_capacity(total), hi: Vec::with_capacity(total), vol: Vec::with_capacity(total) };
    for mut flat in 0..total {
        let mut lo = vec![0.0; l];
        let mut hi = vec![0.0; l];
        for d in (0..l).rev() {
            let i = flat % counts[d];
            flat /= counts[d];
            lo[d] = axes[d][i];
            hi[d] = axes[d][i + 1];
        }
        mesh.vol.push(lo.iter().zip(&hi).map(|(a, b)| b - a).product());
        mesh.lo.push(lo);
        mesh.hi.push(hi);
    }
    mesh
}

struct DualSolution {
    value: f64,
    gap: f64,
}

/// Maximizes `D(λ) = Σλ - (p-1) Σ_j v_j g_j(λ)^p`, `g_j = ((Aᵀλ)_j/(p v_j))^{1/(p-1)}`,
/// by projected Newton steps with backtracking.
fn solve_dual(a: &DMatrix<f64>, vol: &[f64], p: f64) -> Result<DualSolution> {
    let nk = a.nrows();
    let pp = 1.0 / (p - 1.0);
    let sources = |lam: &DVector<f64>| -> (Vec<f64>, Vec<f64>) {
        let atl = a.tr_mul(lam);
        let g = atl.iter().zip(vol).map(|(t, v)| (t.max(0.0) / (p * v)).powf(pp)).collect();
        (atl.iter().copied().collect(), g)
    };
    let dual = |lam: &DVector<f64>, g: &[f64]| {
        lam.sum() - (p - 1.0) * g.iter().zip(vol).map(|(g, v)| v * g.powf(p)).sum::<f64>()
    };
    let primal = |g: &[f64]| -> f64 {
        let ag = a * DVector::from_column_slice(g);
        let t = 1.0 / ag.min();
        if !t.is_finite() {
            return f64::INFINITY;
        }
        t.powf(p) * g.iter().zip(vol).map(|(g, v)| v * g.powf(p)).sum::<f64>()
    };
    // Best multiple of the uniform multiplier.
    let mut lam = DVector::from_element(nk, 1.0);
    let (_, g1) = sources(&lam);
    let s1: f64 = g1.iter().zip(vol).map(|(g, v)| v * g.powf(p)).sum();
    // D(tλ) = t nk - (p-1) t^{p'} s1 is maximal at t^{p'-1} = nk/(p' (p-1) s1).
    let pc = p / (p - 1.0);
    lam *= (nk as f64 / (pc * (p - 1.0) * s1)).powf(1.0 / (pc - 1.0));
    let mut last_gap = f64::INFINITY;
    for _ in 0..500 {
        let (atl, g) = sources(&lam);
        let d = dual(&lam, &g);
        let pr = primal(&g);
        let gap = (pr - d) / pr.abs().max(f64::MIN_POSITIVE);
        last_gap = gap;
        if gap <= SOLVER_GAP {
            return Ok(DualSolution { value: 0.5 * (pr + d), gap });
        }
        let ag = a * DVector::from_column_slice(&g);
        let grad = DVector::from_fn(nk, |i, _| 1.0 - ag[i]);
        // Negative Hessian: A diag(g_j / ((p-1)(Aᵀλ)_j)) Aᵀ.
        let w: Vec<f64> = g.iter().zip(&atl).map(|(g, t)| if *t > 0.0 { g * pp / t } else { 0.0 }).collect();
        let free: Vec<usize> = (0..nk).filter(|&i| lam[i] > 0.0 || grad[i] > 0.0).collect();
        let mut dir = DVector::zeros(nk);
        if !free.is_empty() {
            let nf = free.len();
            let mut h = DMatrix::zeros(nf, nf);
            for (r, &i) in free.iter().enumerate() {
                for (c, &k) in free.iter().enumerate() {
                    h[(r, c)] = (0..a.ncols()).map(|j| a[(i, j)] * w[j] * a[(k, j)]).sum::<f64>();
                }
            }
            let scale = (0..nf).map(|i| h[(i, i)]).fold(0.0, f64::max);
            for i in 0..nf {
                h[(i, i)] += 1e-14 * scale;
            }
            let rhs = DVector::from_fn(nf, |r, _| grad[free[r]]);
            let step = h.cholesky().map(|c| c.solve(&rhs)).unwrap_or(rhs);
            for (r, &i) in free.iter().enumerate() {
                dir[i] = step[r];
            }
        }
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let cand = (&lam + &dir * t).map(|v| v.max(0.0));
            let (_, gc) = sources(&cand);
            if dual(&cand, &gc) > d {
                lam = cand;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Err(Error::Solver { gap: last_gap, iterations: 500 })
}

/// Discrete `C_{α,p}(K)` on one mesh.
fn capacity_at(k: &[Vec<f64>], alpha: f64, p: f64, decades: u32, per_decade: u32) -> Result<DualSolution> {
    let mesh = tensor_mesh(k, decades, per_decade);
    if mesh.vol.is_empty() {
        return Err(Error::Configuration("empty source mesh".into()));
    }
    let nc = mesh.vol.len();
    let entries: Vec<f64> = (0..k.len() * nc)
        .into_par_iter()
        .map(|e| cell_integral(&k[e / nc], &mesh.lo[e % nc], &mesh.hi[e % nc], alpha))
        .collect::<Result<Vec<f64>>>()?;
    let a = DMatrix::from_row_slice(k.len(), nc, &entries);
    solve_dual(&a, &mesh.vol, p)
}

/// Grading density per decade for a mesh in `R^ℓ`.
fn grading(l: usize) -> u32 {
    match l {
        1 => 12,
        2 => 3,
        _ => 2,
    }
}

/// Discretized `C_{α,p}(K)` for a finite `K ⊂ R^ℓ`. The finest mesh is graded
/// down to `10^{-resolution}` around every point; the history adds the meshes
/// with two and four fewer decades.
pub fn bessel_capacity(k: &[Vec<f64>], alpha: f64, p: f64, resolution: u32) -> Result<CapacityResult> {
    check_alpha(alpha)?;
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p = {p} must exceed 1")));
    }
    let step = DECADES_PER_REFINEMENT;
    if resolution < 2 * step + 1 {
        return Err(Error::Configuration(format!("resolution {resolution} leaves no coarser meshes")));
    }
    if k.is_empty() {
        let history = (0..3).map(|i| (10f64.powi(-((resolution - step * (2 - i)) as i32)), 0.0)).collect();
        return Ok(CapacityResult {
            value: 0.0,
            resolution: 10f64.powi(-(resolution as i32)),
            history,
            verdict: CapacityVerdict::Vanishing,
            gap: 0.0,
        });
    }
    let l = k[0].len();
    if l == 0 || k.iter().any(|x| x.len() != l || x.iter().any(|c| !c.is_finite())) {
        return Err(Error::Validation("K must be finite points of one dimension ≥ 1".into()));
    }
    let mut history = Vec::new();
    let mut gap = 0.0;
    for level in [resolution - 2 * step, resolution - step, resolution] {
        let sol = capacity_at(k, alpha, p, level, grading(l))?;
        history.push((10f64.powi(-(level as i32)), sol.value));
        gap = sol.gap;
    }
    let values: Vec<f64> = history.iter().map(|h| h.1).collect();
    Ok(CapacityResult {
        value: *values.last().unwrap(),
        resolution: 10f64.powi(-(resolution as i32)),
        verdict: refinement_verdict(&values),
        history,
        gap,
    })
}

// ─── ρ-capacity ─────────────────────────────────────────────────────────────

/// `sup_w (Σ w)^q / J_ε(Σ w_i δ_{z_i})` over `w ≥ 0`, at one cutoff.
fn rho_value(k: &[Vec<f64>], report: &ExponentReport, q: f64, r: f64, eps: f64) -> Result<(f64, f64)> {
    let spec = QuadratureSpec::with_tol(1e-8).with_cutoff(eps);
    let m = k[0].len();
    let objective = |w: &[f64]| -> Result<f64> {
        let mu = DiscreteMeasure {
            m,
            atoms: k.iter().zip(w).map(|(z, &w)| Atom { z: z.clone(), w }).collect(),
        };
        Ok(j_ar(&mu, report, r, q, &spec)?.value)
    };
    let n = k.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut j = objective(&w)?;
    let mut gap = 0.0;
    if n > 1 {
        // Projected gradient descent of J on the simplex with central-difference gradients.
        for _ in 0..100 {
            let grad: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let hstep = 1e-4 / n as f64;
                    let mut up = w.clone();
                    let mut dn = w.clone();
                    up[i] += hstep;
                    dn[i] = (dn[i] - hstep).max(0.0);
                    Ok((objective(&up)? - objective(&dn)?) / (up[i] - dn[i]))
                })
                .collect::<Result<Vec<f64>>>()?;
            // Frank-Wolfe gap on the simplex.
            let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
            let inner: f64 = grad.iter().zip(&w).map(|(g, w)| g * w).sum();
            gap = (inner - gmin) / j;
            if gap <= 1e-4 {
                break;
            }
            let mut t = 0.5 / grad.iter().map(|g| g.abs()).fold(0.0, f64::max).max(1e-300) * j;
            let mut moved = false;
            for _ in 0..30 {
                let cand = project_simplex(&w.iter().zip(&grad).map(|(w, g)| w - t * g).collect::<Vec<_>>());
                let jc = objective(&cand)?;
                if jc < j {
                    w = cand;
                    j = jc;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
    }
    // J is q-homogeneous: doubling the weights must leave the objective unchanged.
    let doubled: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
    let j2 = objective(&doubled)?;
    let defect = (j2 / (2f64.powf(q) * j) - 1.0).abs();
    if defect > 1e-6 {
        return Err(Error::Accuracy { estimate: 1.0 / j, error: defect / j });
    }
    Ok((1.0 / j, gap))
}

/// Euclidean projection onto `{w ≥ 0, Σ w = 1}`.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `C̃_{ρ,q'}(K) = sup (Σw)^q / J^{A,R}(Σ w_i δ_{z_i})` probed at the inner
/// cutoffs [`RHO_CUTOFFS`]. When `J` of a Dirac mass is finite the values
/// stabilize; at and beyond `q_c` they collapse towards zero.
pub fn rho_capacity(k: &[Vec<f64>], report: &ExponentReport, q: f64, r: f64) -> Result<CapacityResult> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    if report.k >= report.n {
        return Err(Error::Range("ρ-capacity needs an edge of positive dimension".into()));
    }
    if k.is_empty() {
        return Ok(CapacityResult {
            value: 0.0,
            resolution: RHO_CUTOFFS[2],
            history: RHO_CUTOFFS.iter().map(|&e| (e, 0.0)).collect(),
            verdict: CapacityVerdict::Vanishing,
            gap: 0.0,
        });
    }
    let m = report.m();
    if k.iter().any(|z| z.len() != m || norm(z) >= r) {
        return Err(Error::Validation(format!("K must lie in the edge ball of radius {r} in R^{m}")));
    }
    let runs = RHO_CUTOFFS
        .par_iter()
        .map(|&eps| rho_value(k, report, q, r, eps))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = runs.iter().map(|x| x.0).collect();
    Ok(CapacityResult {
        value: values[2],
        resolution: RHO_CUTOFFS[2],
        history: RHO_CUTOFFS.iter().copied().zip(values.iter().copied()).collect(),
        verdict: refinement_verdict(&values),
        gap: runs[2].1,
    })
}

// ─── analytic null test ─────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullTest {
    Null,
    Positive,
    NeedsNumeric,
}

/// Decides `C_{α,p}(piece) = 0` in `R^ℓ` where a closed-form criterion exists:
/// a point is null iff `αp ≤ ℓ`; a ball of intrinsic dimension `d` is null
/// iff `αp ≤ ℓ - d` (positive when `d = ℓ`). Grids need a numeric solve.
pub fn capacity_null_test(piece: &PieceShape, alpha: f64, p: f64, l: usize) -> NullTest {
    let lf = l as f64;
    match piece {
        PieceShape::Point { .. } => {
            if alpha * p <= lf {
                NullTest::Null
            } else {
                NullTest::Positive
            }
        }
        PieceShape::Ball { dim, .. } => {
            let d = dim.unwrap_or(l).min(l) as f64;
            if d >= lf || alpha * p > lf - d {
                NullTest::Positive
            } else {
                NullTest::Null
            }
        }
        PieceShape::Grid { points } if points.is_empty() => NullTest::Null,
        PieceShape::Grid { .. } => NullTest::NeedsNumeric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g2_closed_form_in_one_dimension() {
        for &x in &[0.01, 0.3, 1.0, 2.5, 7.0] {
            let g = bessel_kernel(&[x], 2.0).unwrap();
            assert!((g / (0.5 * (-x as f64).exp()) - 1.0).abs() < 1e-10, "x={x}");
        }
        assert!(matches!(bessel_kernel(&[0.0], 0.5), Err(Error::Singularity(_))));
        assert!((bessel_kernel(&[0.0], 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cell_integral_of_g2_is_exact() {
        // ∫_a^b e^{-|y|}/2 dy with the pole inside, at an end, and outside.
        let exact = |a: f64, b: f64| {
            let prim = |y: f64| if y >= 0.0 { -(-y).exp_m1() } else { y.exp_m1() };
            0.5 * (prim(b) - prim(a))
        };
        for &(a, b) in &[(-0.3, 0.7), (0.0, 1e-9), (0.5, 3.0), (-2.0, -1e-6), (1e-12, 2e-12)] {
            let v = cell_integral(&[0.0], &[a], &[b], 2.0).unwrap();
            assert!((v / exact(a, b) - 1.0).abs() < 1e-8, "[{a},{b}]: {v} vs {}", exact(a, b));
        }
    }

    #[test]
    fn null_test_thresholds() {
        let pt = PieceShape::Point { z: vec![0.0, 0.0] };
        assert_eq!(capacity_null_test(&pt, 0.5, 2.0, 2), NullTest::Null);
        let pt = PieceShape::Point { z: vec![0.0] };
        assert_eq!(capacity_null_test(&pt, 0.9, 2.0, 1), NullTest::Positive);
        let ball = PieceShape::Ball { center: vec![0.0], radius: 1.0, dim: None };
        assert_eq!(capacity_null_test(&ball, 0.1, 2.0, 1), NullTest::Positive);
        let grid = PieceShape::Grid { points: vec![vec![0.0]] };
        assert_eq!(capacity_null_test(&grid, 0.1, 2.0, 1), NullTest::NeedsNumeric);
    }

    #[test]
    fn simplex_projection() {
        let w = project_simplex(&[0.8, 0.6, -1.0]);
        assert!((w[0] - 0.6).abs() < 1e-15 && (w[1] - 0.4).abs() < 1e-15 && w[2] == 0.0);
    }

    #[test]
    fn empty_set_has_zero_capacity() {
        assert_eq!(bessel_capacity(&[], 0.5, 2.0, 8).unwrap().value, 0.0);
    }
}
