//! Adaptive Gauss–Kronrod (7/15) quadrature with a global error queue.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and limits for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Panels of width `split_radius × scale` are forced around each atom,
    /// where `scale = min(τ, nearest-atom distance)`.
    pub split_radius: f64,
    /// Lower cutoff `ε` of `τ`-integrals; `0` integrates down to `τ = 0` and
    /// is only allowed when the integrand is integrable there.
    pub inner_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_subdivisions: 20_000,
            split_radius: 0.5,
            inner_cutoff: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..Default::default() }
    }

    pub fn with_cutoff(mut self, eps: f64) -> Self {
        self.inner_cutoff = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 1e-10 && self.rel_tol < 1e-2) {
            return Err(Error::Configuration(format!(
                "relative tolerance {} outside (1e-10, 1e-2)",
                self.rel_tol
            )));
        }
        if !(self.inner_cutoff >= 0.0) || !(self.split_radius > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Configuration("invalid cutoff, split radius or subdivision limit".into()));
        }
        Ok(())
    }

    /// Tolerance handed to inner integrals of a nested quadrature.
    pub fn inner(&self) -> Self {
        QuadratureSpec { rel_tol: (self.rel_tol * 0.1).max(1e-13), ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod panel: (Kronrod value, |Kronrod - Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[i] * s;
        if i % 2 == 1 {
            rg += WG[i / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Integrates `f` over the union of consecutive intervals `[p_i, p_{i+1}]`.
/// Zero-width intervals are skipped.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut evals = 0usize;
    let mut done: Vec<Panel> = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = gk15(&mut f, a, b);
        evals += 15;
        heap.push(Panel { a, b, value, error, seq });
        seq += 1;
    }
    let total = |heap: &BinaryHeap<Panel>, done: &[Panel]| -> (f64, f64) {
        let mut parts: Vec<(f64, f64, f64)> =
            heap.iter().chain(done).map(|p| (p.a, p.value, p.error)).collect();
        parts.sort_by(|x, y| x.0.total_cmp(&y.0));
        parts.iter().fold((0.0, 0.0), |(v, e), p| (v + p.1, e + p.2))
    };
    let (mut value, mut error) = total(&heap, &done);
    let mut splits = 0usize;
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Accuracy { estimate: value, error });
        }
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-15 * p.a.abs().max(p.b.abs()) {
            // Panel cannot be split further in floating point.
            done.push(p);
            continue;
        }
        if splits >= spec.max_subdivisions {
            heap.push(p);
            let (v, e) = total(&heap, &done);
            return Err(Error::Accuracy { estimate: v, error: e });
        }
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        evals += 30;
        splits += 1;
        value += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: mid, value: v1, error: e1, seq });
        heap.push(Panel { a: mid, b: p.b, value: v2, error: e2, seq: seq + 1 });
        seq += 2;
        if splits % 64 == 0 {
            (value, error) = total(&heap, &done);
        }
    }
    let (value, error) = total(&heap, &done);
    if error > spec.abs_tol.max(spec.rel_tol * value.abs()) {
        return Err(Error::Accuracy { estimate: value, error });
    }
    Ok(Estimate { value, error, evaluations: evals })
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_breaks(f, &[a, b], spec)
}

/// `∫_a^∞ f` through `x = a + L t/(1-t)`, `t ∈ (0, 1)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let g = |t: f64| {
        let u = 1.0 - t;
        let x = a + scale * t / u;
        let v = f(x) * scale / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_breaks(g, &[0.0, 0.5, 0.9, 0.99, 1.0], spec)
}

/// `∫_{-∞}^b f`.
pub fn integrate_from_neg_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    b: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate_to_infinity(|x| f(2.0 * b - x), b, scale, spec)
}

/// Like [`integrate_breaks`] but returns the best estimate even when the
/// tolerance was not met. Used for inner integrals of nested quadratures,
/// whose accuracy is covered by the outer error budget.
pub fn integrate_breaks_soft<F: FnMut(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> f64 {
    match integrate_breaks(f, points, spec) {
        Ok(e) => e.value,
        Err(Error::Accuracy { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    }
}

/// `lo, lo·r, lo·r², …, hi` (geometric panel boundaries; `lo > 0`).
pub fn geometric_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut v = vec![lo];
    let mut x = lo;
    while x * ratio < hi * (1.0 - 1e-12) {
        x *= ratio;
        v.push(x);
    }
    v.push(hi);
    v
}

/// Integrates `f` on `(0, b]` with dyadic panels `[b 2^{-i-1}, b 2^{-i}]`
/// down to `b 2^{-levels}`; the innermost panel `[0, b 2^{-levels}]` is
/// a single Kronrod panel. Suitable for integrable algebraic singularities.
pub fn integrate_from_zero<F: FnMut(f64) -> f64>(
    f: F,
    b: f64,
    levels: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut pts = vec![0.0];
    for i in (0..=levels).rev() {
        pts.push(b * 0.5f64.powi(i as i32));
    }
    integrate_breaks(f, &pts, spec)
}

/// Brent's method for a root of `f` in `[a, b]` with `f(a) f(b) ≤ 0`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((e.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn algebraic_singularity() {
        let spec = QuadratureSpec::with_tol(1e-9);
        let e = integrate_from_zero(|x| x.powf(-0.5), 1.0, 60, &spec).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8, "{}", e.value);
    }

    #[test]
    fn semi_infinite() {
        let spec = QuadratureSpec::with_tol(1e-10);
        let e = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, &spec).unwrap();
        assert!((e.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        let e = integrate_from_neg_infinity(|x| (x).exp(), 0.0, 1.0, &spec).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nonconvergence_carries_estimate() {
        let spec = QuadratureSpec { max_subdivisions: 3, ..QuadratureSpec::with_tol(1e-9) };
        match integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &spec) {
            Err(Error::Accuracy { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn brent_finds_root() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(matches!(brent(|x| x * x + 1.0, 0.0, 1.0, 1e-12, 50), Err(Error::Bracket(_))));
    }
}
