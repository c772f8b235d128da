//! Wedges, polyhedra, boundary measures and compact sets.
//!
//! Spherical coordinates on `S^{N-1}` follow
//!
//! ```text
//! x_1 = r sinθ_{N-1} … sinθ_2 sinθ_1
//! x_2 = r sinθ_{N-1} … sinθ_2 cosθ_1
//! x_3 = r sinθ_{N-1} … sinθ_3 cosθ_2
//! …
//! x_N = r cosθ_{N-1}
//! ```
//!
//! with `θ_1 ∈ [0, 2π]` and `θ_ℓ ∈ [0, π]` for `ℓ ≥ 2`. A wedge of codimension
//! `k` has opening `A = (0, α_1) × ∏_{j=2}^{k-1} (a_j, a'_j)` in the angles
//! `θ_1..θ_{k-1}`, so the first `k` Cartesian coordinates `x'` carry the
//! angular structure and the edge `d_A = {x' = 0}` is a copy of `R^{N-k}`.
//! Measures and sets living on a stratum are stored in these intrinsic
//! `R^{N-k}` coordinates; the embedding into `R^N` is never built.

use crate::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};

fn is_false(b: &bool) -> bool {
    !*b
}

/// Geometric input for one k-wedge `D_A = {x : x'/|x'| ∈ A}` in `R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    /// Opening of the periodic angle `θ_1`; ignored for faces (`k = 1`).
    #[serde(default)]
    pub alpha1: f64,
    /// `(a_j, a'_j)` for `j = 2..k-1`, bounding `θ_j`.
    #[serde(default)]
    pub intervals: Vec<(f64, f64)>,
    /// Opt-in mode allowing `a_j = 0` or `a'_j = π`; the eigenfunction is
    /// then required to stay bounded at the pole instead of vanishing there.
    #[serde(default, skip_serializing_if = "is_false")]
    pub pole_endpoints: bool,
}

impl WedgeSpec {
    /// Two-dimensional opening `(0, α)` in `R^N`.
    pub fn dihedral(n: usize, alpha1: f64) -> Self {
        WedgeSpec { n, k: 2, alpha1, intervals: Vec::new(), pole_endpoints: false }
    }

    /// The positive orthant cone of `R^3`, i.e. the vertex of a cube.
    pub fn octant() -> Self {
        WedgeSpec {
            n: 3,
            k: 3,
            alpha1: PI / 2.0,
            intervals: vec![(0.0, PI / 2.0)],
            pole_endpoints: true,
        }
    }

    /// Dimension `N - k` of the edge.
    pub fn edge_dim(&self) -> usize {
        self.n - self.k
    }

    /// Whether the angles `θ_1..θ_{k-1}` lie in the closed box `Ā`.
    pub fn in_closed_opening(&self, angles: &[f64]) -> bool {
        if self.k < 2 {
            return true;
        }
        let eps = 1e-12;
        if angles.len() != self.k - 1 {
            return false;
        }
        if angles[0] < -eps || angles[0] > self.alpha1 + eps {
            return false;
        }
        self.intervals
            .iter()
            .zip(&angles[1..])
            .all(|(&(a, b), &t)| t >= a - eps && t <= b + eps)
    }
}

/// Checks every [`WedgeSpec`] invariant and returns the spec unchanged.
pub fn validate_wedge(spec: &WedgeSpec) -> Result<WedgeSpec> {
    if spec.n < 2 {
        return Err(Error::Range(format!("N = {} must be at least 2", spec.n)));
    }
    if spec.k < 1 || spec.k > spec.n {
        return Err(Error::Range(format!("k = {} must lie in 1..={}", spec.k, spec.n)));
    }
    if spec.k == 1 {
        if !spec.intervals.is_empty() {
            return Err(Error::Validation("a face (k = 1) takes no intervals".into()));
        }
        return Ok(spec.clone());
    }
    if !spec.alpha1.is_finite() || spec.alpha1 <= 0.0 {
        return Err(Error::Range(format!("alpha1 = {} must be positive", spec.alpha1)));
    }
    if spec.alpha1 >= TAU {
        return Err(Error::DegenerateOpening(spec.alpha1));
    }
    if spec.intervals.len() != spec.k - 2 {
        return Err(Error::Validation(format!(
            "k = {} needs {} intervals, got {}",
            spec.k,
            spec.k - 2,
            spec.intervals.len()
        )));
    }
    for (i, &(a, b)) in spec.intervals.iter().enumerate() {
        let j = i + 2;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Validation(format!("interval for θ_{j} is not finite")));
        }
        if a < 0.0 || b > PI {
            return Err(Error::PoleEndpoint(format!(
                "interval ({a}, {b}) for θ_{j} leaves [0, π]"
            )));
        }
        if a >= b {
            return Err(Error::Range(format!("interval ({a}, {b}) for θ_{j} is empty")));
        }
        if (a == 0.0 || b == PI) && !spec.pole_endpoints {
            return Err(Error::PoleEndpoint(format!(
                "interval ({a}, {b}) for θ_{j} touches a pole; set pole_endpoints to allow it"
            )));
        }
    }
    Ok(spec.clone())
}

/// Maps `(r, θ_1..θ_{N-1})` to `R^N`.
pub fn spherical_to_cartesian(r: f64, sigma: &[f64]) -> Result<Vec<f64>> {
    if sigma.is_empty() {
        return Err(Error::Domain("need at least one angle (N ≥ 2)".into()));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be finite and ≥ 0")));
    }
    if !(0.0..=TAU).contains(&sigma[0]) {
        return Err(Error::Domain(format!("θ_1 = {} outside [0, 2π]", sigma[0])));
    }
    for (i, &t) in sigma.iter().enumerate().skip(1) {
        if !(0.0..=PI).contains(&t) {
            return Err(Error::Domain(format!("θ_{} = {t} outside [0, π]", i + 1)));
        }
    }
    let n = sigma.len() + 1;
    let mut x = vec![0.0; n];
    // Walk down from θ_{N-1}: `scale` is r times the product of the sines seen so far.
    let mut scale = r;
    for l in (2..n).rev() {
        let t = sigma[l - 1];
        x[l] = scale * t.cos();
        scale *= t.sin();
    }
    x[0] = scale * sigma[0].sin();
    x[1] = scale * sigma[0].cos();
    Ok(x)
}

/// Inverse of [`spherical_to_cartesian`] on the open chart.
pub fn cartesian_to_spherical(x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Domain("need N ≥ 2".into()));
    }
    let mut sigma = vec![0.0; n - 1];
    let mut t1 = x[0].atan2(x[1]);
    if t1 < 0.0 {
        t1 += TAU;
    }
    sigma[0] = t1;
    let mut rho2 = x[0] * x[0] + x[1] * x[1];
    for l in 2..n {
        sigma[l - 1] = rho2.sqrt().atan2(x[l]);
        rho2 += x[l] * x[l];
    }
    Ok((rho2.sqrt(), sigma))
}

/// Opening data of a stratum: a box wedge or a supplied first eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Opening {
    Wedge(WedgeSpec),
    Gamma { gamma: f64 },
}

impl<'de> Deserialize<'de> for Opening {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct G {
            gamma: f64,
        }
        let v = serde_json::Value::deserialize(d)?;
        if v.get("gamma").is_some() {
            let g: G = serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(Opening::Gamma { gamma: g.gamma })
        } else {
            let w: WedgeSpec = serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(Opening::Wedge(w))
        }
    }
}

/// One face, edge or vertex of a polyhedron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stratum {
    pub id: String,
    pub k: usize,
    #[serde(default)]
    pub opening: Option<Opening>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub strata: Vec<Stratum>,
}

impl PolyhedronSpec {
    pub fn stratum(&self, id: &str) -> Result<&Stratum> {
        self.strata
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Reference(format!("unknown stratum id {id:?}")))
    }

    /// Unit cube of `R^3`: faces `F1..F6`, right-angle edges `E1..E12` and
    /// octant vertices `V1..V8` (vertex eigenvalue supplied as γ = 12).
    pub fn cube() -> Self {
        let mut strata = Vec::new();
        for i in 1..=6 {
            strata.push(Stratum { id: format!("F{i}"), k: 1, opening: None });
        }
        for i in 1..=12 {
            strata.push(Stratum {
                id: format!("E{i}"),
                k: 2,
                opening: Some(Opening::Wedge(WedgeSpec::dihedral(3, PI / 2.0))),
            });
        }
        for i in 1..=8 {
            strata.push(Stratum {
                id: format!("V{i}"),
                k: 3,
                opening: Some(Opening::Gamma { gamma: 12.0 }),
            });
        }
        PolyhedronSpec { n: 3, strata }
    }
}

/// Checks ids, codimensions and openings of every stratum.
pub fn validate_polyhedron(poly: &PolyhedronSpec) -> Result<()> {
    if poly.n < 2 {
        return Err(Error::Range(format!("N = {} must be at least 2", poly.n)));
    }
    let mut seen = BTreeSet::new();
    for s in &poly.strata {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::Validation(format!("duplicate stratum id {:?}", s.id)));
        }
        if s.k < 1 || s.k > poly.n {
            return Err(Error::Range(format!("stratum {:?}: k = {} outside 1..={}", s.id, s.k, poly.n)));
        }
        match (&s.opening, s.k) {
            (None, 1) => {}
            (None, _) => {
                return Err(Error::Validation(format!(
                    "stratum {:?} with k = {} needs an opening",
                    s.id, s.k
                )))
            }
            (Some(_), 1) => {
                return Err(Error::Validation(format!("face {:?} takes no opening", s.id)))
            }
            (Some(Opening::Gamma { gamma }), _) => {
                if !(*gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::Domain(format!("stratum {:?}: γ = {gamma} must be positive", s.id)));
                }
            }
            (Some(Opening::Wedge(w)), k) => {
                validate_wedge(w)?;
                if w.n != poly.n || w.k != k {
                    return Err(Error::Validation(format!(
                        "stratum {:?}: opening has (N, k) = ({}, {}), expected ({}, {k})",
                        s.id, w.n, w.k, poly.n
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub z: Vec<f64>,
    pub w: f64,
}

/// Finite positive combination of Dirac masses on `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteMeasure {
    pub m: usize,
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn zero(m: usize) -> Self {
        DiscreteMeasure { m, atoms: Vec::new() }
    }

    pub fn dirac(z: Vec<f64>, w: f64) -> Self {
        DiscreteMeasure { m: z.len(), atoms: vec![Atom { z, w }] }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.atoms.iter().enumerate() {
            if a.z.len() != self.m {
                return Err(Error::Validation(format!(
                    "atom {i}: position has {} coordinates, m = {}",
                    a.z.len(),
                    self.m
                )));
            }
            if a.z.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!("atom {i}: position not finite")));
            }
            if !(a.w >= 0.0) || !a.w.is_finite() {
                return Err(Error::Validation(format!("atom {i}: weight {} must be finite and ≥ 0", a.w)));
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.w == 0.0)
    }

    /// Largest distance between two charged atoms.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<&Atom> = self.atoms.iter().filter(|a| a.w > 0.0).collect();
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(dist(&a.z, &b.z));
            }
        }
        d
    }

    /// Largest `|z|` over charged atoms.
    pub fn radius(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.w > 0.0)
            .map(|a| norm(&a.z))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, t: f64) -> Self {
        DiscreteMeasure {
            m: self.m,
            atoms: self.atoms.iter().map(|a| Atom { z: a.z.clone(), w: t * a.w }).collect(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        DiscreteMeasure {
            m: self.m,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { z: a.z.iter().zip(shift).map(|(x, s)| x + s).collect(), w: a.w })
                .collect(),
        }
    }

    /// Default truncation radius `8 (diam + 1)`.
    pub fn default_radius(&self) -> f64 {
        8.0 * (self.diameter() + 1.0)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Splits boundary data given per stratum into the full family `{μ_L}`,
/// one entry per stratum (zero where nothing was supplied).
pub fn decompose_measure(
    poly: &PolyhedronSpec,
    mu: &BTreeMap<String, DiscreteMeasure>,
) -> Result<BTreeMap<String, DiscreteMeasure>> {
    for id in mu.keys() {
        poly.stratum(id)?;
    }
    let mut out = BTreeMap::new();
    for s in &poly.strata {
        let m = poly.n - s.k;
        let piece = match mu.get(&s.id) {
            Some(meas) => {
                meas.validate()?;
                if meas.m != m {
                    return Err(Error::Validation(format!(
                        "measure on {:?} has m = {}, stratum needs m = {m}",
                        s.id, meas.m
                    )));
                }
                meas.clone()
            }
            None => DiscreteMeasure::zero(m),
        };
        out.insert(s.id.clone(), piece);
    }
    Ok(out)
}

/// Geometry of one piece of a compact boundary set, in intrinsic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceShape {
    Point {
        #[serde(default)]
        z: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        /// Intrinsic dimension of the ball; defaults to the stratum dimension.
        #[serde(default)]
        dim: Option<usize>,
    },
    Grid {
        points: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPiece {
    pub stratum: String,
    #[serde(flatten)]
    pub shape: PieceShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSetDescription {
    pub pieces: Vec<SetPiece>,
}

/// Checks stratum references, coordinate counts and radii.
pub fn validate_set(poly: &PolyhedronSpec, set: &CompactSetDescription) -> Result<()> {
    for (i, p) in set.pieces.iter().enumerate() {
        let s = poly.stratum(&p.stratum)?;
        let m = poly.n - s.k;
        let check = |z: &[f64]| -> Result<()> {
            if z.len() != m || z.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!(
                    "piece {i}: expected {m} finite coordinates on {:?}",
                    p.stratum
                )));
            }
            Ok(())
        };
        match &p.shape {
            PieceShape::Point { z } => check(z)?,
            PieceShape::Ball { center, radius, dim } => {
                check(center)?;
                if !(*radius > 0.0) {
                    return Err(Error::Validation(format!("piece {i}: ball radius must be > 0")));
                }
                if dim.is_some_and(|d| d > m) {
                    return Err(Error::Validation(format!("piece {i}: ball dimension exceeds {m}")));
                }
            }
            PieceShape::Grid { points } => {
                for z in points {
                    check(z)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_examples() {
        let x = spherical_to_cartesian(1.0, &[0.0, PI / 2.0]).unwrap();
        assert!((x[0]).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15 && x[2].abs() < 1e-15);
        let x = spherical_to_cartesian(2.0, &[PI / 2.0, PI / 2.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
        let x = spherical_to_cartesian(0.0, &[1.0, 2.0, 0.5]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert!(matches!(spherical_to_cartesian(1.0, &[7.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(spherical_to_cartesian(1.0, &[1.0, 3.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn wedge_validation_examples() {
        assert!(validate_wedge(&WedgeSpec::dihedral(3, PI / 2.0)).is_ok());
        assert!(matches!(
            validate_wedge(&WedgeSpec::dihedral(3, TAU)),
            Err(Error::DegenerateOpening(_))
        ));
        let bad = WedgeSpec { n: 4, k: 3, alpha1: PI / 2.0, intervals: vec![(0.2, 3.2)], pole_endpoints: false };
        assert!(matches!(validate_wedge(&bad), Err(Error::PoleEndpoint(_))));
        let mut oct = WedgeSpec::octant();
        assert!(validate_wedge(&oct).is_ok());
        oct.pole_endpoints = false;
        assert!(matches!(validate_wedge(&oct), Err(Error::PoleEndpoint(_))));
        let k0 = WedgeSpec { n: 3, k: 4, ..WedgeSpec::dihedral(3, 1.0) };
        assert!(matches!(validate_wedge(&k0), Err(Error::Range(_))));
    }

    #[test]
    fn wedge_json_uses_exact_field_names() {
        let w: WedgeSpec =
            serde_json::from_str(r#"{"N":4,"k":3,"alpha1":1.0,"intervals":[[0.5,2.0]]}"#).unwrap();
        assert_eq!(w.intervals, vec![(0.5, 2.0)]);
        let s = crate::json::to_string(&w);
        assert_eq!(s, r#"{"N":4,"k":3,"alpha1":1,"intervals":[[0.5,2]]}"#);
        let err = serde_json::from_str::<WedgeSpec>(r#"{"N":3,"alpha1":1.0}"#).unwrap_err();
        assert!(err.to_string().contains("`k`"));
    }

    #[test]
    fn polyhedron_json_round_trip() {
        let cube = PolyhedronSpec::cube();
        validate_polyhedron(&cube).unwrap();
        let text = crate::json::to_string(&cube);
        let back: PolyhedronSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cube);
        assert!(text.contains(r#"{"id":"V1","k":3,"opening":{"gamma":12}}"#));
        assert!(text.contains(r#"{"id":"F1","k":1,"opening":null}"#));
    }

    #[test]
    fn decomposition_examples() {
        let cube = PolyhedronSpec::cube();
        let empty = decompose_measure(&cube, &BTreeMap::new()).unwrap();
        assert_eq!(empty.len(), 26);
        assert!(empty.values().all(|m| m.is_zero()));

        let mut mu = BTreeMap::new();
        mu.insert("E1".to_string(), DiscreteMeasure::dirac(vec![0.1], 1.0));
        let fam = decompose_measure(&cube, &mu).unwrap();
        assert_eq!(fam.values().filter(|m| !m.is_zero()).count(), 1);
        assert!(!fam["E1"].is_zero());

        mu.insert("E2".to_string(), DiscreteMeasure::dirac(vec![-0.3], 2.0));
        let fam = decompose_measure(&cube, &mu).unwrap();
        assert_eq!(fam["E1"].mass(), 1.0);
        assert_eq!(fam["E2"].mass(), 2.0);
        assert_eq!(fam.values().map(|m| m.mass()).sum::<f64>(), 3.0);

        mu.insert("X9".to_string(), DiscreteMeasure::dirac(vec![0.0], 1.0));
        assert!(matches!(decompose_measure(&cube, &mu), Err(Error::Reference(_))));
    }

    #[test]
    fn set_json_and_validation() {
        let cube = PolyhedronSpec::cube();
        let set: CompactSetDescription = serde_json::from_str(
            r#"{"pieces":[{"stratum":"V1","kind":"point"},
                          {"stratum":"E1","kind":"ball","center":[0.0],"radius":0.5},
                          {"stratum":"F1","kind":"grid","points":[[0.0,0.0],[0.1,0.0]]}]}"#,
        )
        .unwrap();
        validate_set(&cube, &set).unwrap();
        let bad: CompactSetDescription = serde_json::from_str(
            r#"{"pieces":[{"stratum":"E1","kind":"ball","center":[0.0],"radius":0.0}]}"#,
        )
        .unwrap();
        assert!(validate_set(&cube, &bad).is_err());
    }
}
