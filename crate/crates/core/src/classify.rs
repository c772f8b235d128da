//! Stratum regimes, good-measure verdicts and removability of compact sets.
//!
//! | regime                 | condition                    |
//! |------------------------|------------------------------|
//! | `subcritical`          | `q < q_c`                    |
//! | `capacity-regime`      | `q_c ≤ q < q_c*`, `k < N`    |
//! | `removable-stratum`    | `q ≥ q_c*`, `k < N`          |
//! | `vertex-supercritical` | `k = N`, `q ≥ q_c`           |
//!
//! Thresholds are compared with a relative slack of [`THRESHOLD_SLACK`] so
//! that `q` typed as a decimal lands on the intended side of an exact `q_c`.

use crate::capacity::{capacity_null_test, NullTest};
use crate::exponents::{conjugate, critical_exponents, ExponentReport};
use crate::geometry::{validate_polyhedron, validate_set, CompactSetDescription, DiscreteMeasure, Opening, PieceShape, PolyhedronSpec, Stratum};
use crate::spectral::OpeningEigen;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const THRESHOLD_SLACK: f64 = 1e-12;
/// Tolerance of eigenvalue chains solved for classification.
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Subcritical,
    CapacityRegime,
    RemovableStratum,
    VertexSupercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub stratum: String,
    pub regime: Regime,
    pub q_c: f64,
    /// `+∞` on faces, serialized as `null`.
    pub q_c_star: f64,
    pub s: Option<f64>,
    pub reason: String,
    pub warning: Option<String>,
}

fn at_least(q: f64, threshold: f64) -> bool {
    q >= threshold * (1.0 - THRESHOLD_SLACK)
}

/// Critical exponents of a stratum of a polyhedron in `R^n`.
pub fn stratum_report(n: usize, stratum: &Stratum) -> Result<ExponentReport> {
    let gamma = match (&stratum.opening, stratum.k) {
        (_, 1) => 0.0,
        (Some(Opening::Gamma { gamma }), _) => *gamma,
        (Some(Opening::Wedge(w)), _) => OpeningEigen::compute(w, EIGEN_TOL)?.gamma,
        (None, k) => {
            return Err(Error::Validation(format!("stratum {:?} with k = {k} needs an opening", stratum.id)))
        }
    };
    critical_exponents(n, stratum.k, gamma)
}

/// Regime of a stratum with known exponents.
pub fn verdict_from_report(id: &str, report: &ExponentReport, q: f64) -> Result<Verdict> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    let vertex = report.k == report.n;
    let (regime, s, reason) = if !at_least(q, report.q_c) {
        (Regime::Subcritical, None, "q < q_c: every measure on this stratum is good".to_string())
    } else if vertex {
        (Regime::VertexSupercritical, None, "μ(L) = 0 required".to_string())
    } else if at_least(q, report.q_c_star) {
        (Regime::RemovableStratum, None, "μ(L) = 0 required".to_string())
    } else {
        let s = report.s(q)?;
        let reason = format!(
            "μ must not charge sets of zero C_{{s,q'}}-capacity on R^{} (s = {}, q' = {})",
            report.m(),
            s,
            conjugate(q)
        );
        (Regime::CapacityRegime, Some(s), reason)
    };
    let warning = ((q - report.q_c).abs() <= THRESHOLD_SLACK * report.q_c)
        .then(|| "q = q_c: the norm equivalence holds only for measures of small support diameter".to_string());
    Ok(Verdict {
        stratum: id.to_string(),
        regime,
        q_c: report.q_c,
        q_c_star: report.q_c_star,
        s,
        reason,
        warning,
    })
}

pub fn stratum_verdict(poly: &PolyhedronSpec, stratum: &Stratum, q: f64) -> Result<Verdict> {
    verdict_from_report(&stratum.id, &stratum_report(poly.n, stratum)?, q)
}

/// Exponent reports of every stratum; strata sharing an opening share one solve.
pub fn polyhedron_reports(poly: &PolyhedronSpec) -> Result<BTreeMap<String, ExponentReport>> {
    validate_polyhedron(poly)?;
    let mut cache: BTreeMap<String, ExponentReport> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for s in &poly.strata {
        let key = format!("{}|{}", s.k, serde_json::to_string(&s.opening).unwrap_or_default());
        let report = match cache.get(&key) {
            Some(r) => *r,
            None => {
                let r = stratum_report(poly.n, s)?;
                cache.insert(key, r);
                r
            }
        };
        out.insert(s.id.clone(), report);
    }
    Ok(out)
}

/// Verdicts of every stratum at `q`, in declaration order.
pub fn classify_polyhedron(poly: &PolyhedronSpec, q: f64) -> Result<Vec<Verdict>> {
    let reports = polyhedron_reports(poly)?;
    poly.strata.iter().map(|s| verdict_from_report(&s.id, &reports[&s.id], q)).collect()
}

// ─── capacity evidence ──────────────────────────────────────────────────────

/// Nullity of the `C_{s,q'}`-capacity of one atom (good-measure checks) or
/// one set piece (removability checks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evidence {
    pub stratum: String,
    pub index: usize,
    pub status: NullTest,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityEvidence {
    pub entries: Vec<Evidence>,
}

impl CapacityEvidence {
    pub fn lookup(&self, stratum: &str, index: usize) -> Option<NullTest> {
        self.entries.iter().find(|e| e.stratum == stratum && e.index == index).map(|e| e.status)
    }

    pub fn insert(&mut self, stratum: &str, index: usize, status: NullTest) {
        self.entries.retain(|e| !(e.stratum == stratum && e.index == index));
        self.entries.push(Evidence { stratum: stratum.to_string(), index, status });
    }

    /// Adds the closed-form verdict for every atom on a capacity-regime stratum
    /// (a point is `C_{s,q'}`-null in `R^m` iff `s q' ≤ m`); existing entries win.
    pub fn with_point_evidence(mut self, poly: &PolyhedronSpec, measures: &BTreeMap<String, DiscreteMeasure>, q: f64) -> Result<Self> {
        let reports = polyhedron_reports(poly)?;
        for (id, mu) in measures {
            let report = reports.get(id).ok_or_else(|| Error::Reference(format!("unknown stratum id {id:?}")))?;
            let v = verdict_from_report(id, report, q)?;
            let Some(s) = v.s else { continue };
            for (i, a) in mu.atoms.iter().enumerate() {
                if self.lookup(id, i).is_none() {
                    let status = capacity_null_test(&PieceShape::Point { z: a.z.clone() }, s, conjugate(q), report.m());
                    self.insert(id, i, status);
                }
            }
        }
        Ok(self)
    }
}

// ─── good measures ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Accept,
    Reject,
    NeedsNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumCheck {
    pub verdict: Verdict,
    pub status: Status,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodMeasureReport {
    pub status: Status,
    pub strata: Vec<StratumCheck>,
}

fn overall(checks: &[Status]) -> Status {
    if checks.contains(&Status::Reject) {
        Status::Reject
    } else if checks.contains(&Status::NeedsNumeric) {
        Status::NeedsNumeric
    } else {
        Status::Accept
    }
}

/// Whether `μ = Σ_L μ_L` is a good measure. Rejections are decided first;
/// otherwise missing evidence is an [`Error::IncompleteEvidence`].
pub fn good_measure_check(
    poly: &PolyhedronSpec,
    measures: &BTreeMap<String, DiscreteMeasure>,
    q: f64,
    evidence: &CapacityEvidence,
) -> Result<GoodMeasureReport> {
    let reports = polyhedron_reports(poly)?;
    let mut strata = Vec::new();
    for (id, mu) in measures {
        let report = reports.get(id).ok_or_else(|| Error::Reference(format!("unknown stratum id {id:?}")))?;
        mu.validate()?;
        if mu.m != report.m() {
            return Err(Error::Validation(format!("measure on {id:?} lives in R^{}, expected R^{}", mu.m, report.m())));
        }
        let verdict = verdict_from_report(id, report, q)?;
        let charged: Vec<usize> = (0..mu.atoms.len()).filter(|&i| mu.atoms[i].w > 0.0).collect();
        let (status, reason) = match verdict.regime {
            _ if charged.is_empty() => (Status::Accept, "μ vanishes on this stratum".to_string()),
            Regime::Subcritical => (Status::Accept, verdict.reason.clone()),
            Regime::RemovableStratum | Regime::VertexSupercritical => (Status::Reject, "μ(L) = 0 required".to_string()),
            Regime::CapacityRegime => {
                let lookups: Vec<(usize, Option<NullTest>)> = charged.iter().map(|&i| (i, evidence.lookup(id, i))).collect();
                if let Some((i, _)) = lookups.iter().find(|(_, e)| *e == Some(NullTest::Null)) {
                    (Status::Reject, format!("atom {i} charges a C_{{s,q'}}-null set"))
                } else if let Some((i, _)) = lookups.iter().find(|(_, e)| *e != Some(NullTest::Positive)) {
                    (Status::NeedsNumeric, format!("no capacity evidence for atom {i}"))
                } else {
                    (Status::Accept, "every atom sits on a set of positive capacity".to_string())
                }
            }
        };
        strata.push(StratumCheck { verdict, status, reason });
    }
    let status = overall(&strata.iter().map(|c| c.status).collect::<Vec<_>>());
    if status == Status::NeedsNumeric {
        let missing: Vec<String> = strata
            .iter()
            .filter(|c| c.status == Status::NeedsNumeric)
            .map(|c| format!("{}: {}", c.verdict.stratum, c.reason))
            .collect();
        return Err(Error::IncompleteEvidence(format!("needs-numeric ({})", missing.join("; "))));
    }
    Ok(GoodMeasureReport { status, strata })
}

// ─── removability ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceVerdict {
    pub piece: usize,
    pub stratum: String,
    pub regime: Regime,
    pub removable: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovableReport {
    pub removable: bool,
    pub pieces: Vec<PieceVerdict>,
}

/// Whether the compact set `E` is removable at `q`. Point and ball pieces are
/// decided in closed form; grid pieces need evidence keyed by piece index.
pub fn removable_check(
    poly: &PolyhedronSpec,
    set: &CompactSetDescription,
    q: f64,
    evidence: &CapacityEvidence,
) -> Result<RemovableReport> {
    let reports = polyhedron_reports(poly)?;
    validate_set(poly, set)?;
    let mut pieces = Vec::new();
    let mut missing = Vec::new();
    for (i, piece) in set.pieces.iter().enumerate() {
        let report = &reports[&piece.stratum];
        let v = verdict_from_report(&piece.stratum, report, q)?;
        let (removable, reason) = match v.regime {
            Regime::Subcritical => (false, "q < q_c: points of this stratum carry admissible Dirac masses".to_string()),
            Regime::VertexSupercritical => (true, "k = N and q ≥ q_c".to_string()),
            Regime::RemovableStratum => (true, "q ≥ q_c*".to_string()),
            Regime::CapacityRegime => {
                let s = v.s.unwrap_or(0.0);
                let status = match capacity_null_test(&piece.shape, s, conjugate(q), report.m()) {
                    NullTest::NeedsNumeric => evidence.lookup(&piece.stratum, i).unwrap_or(NullTest::NeedsNumeric),
                    t => t,
                };
                match status {
                    NullTest::Null => (true, format!("C_{{s,q'}}(E ∩ L) = 0 with s = {s}")),
                    NullTest::Positive => (false, format!("C_{{s,q'}}(E ∩ L) > 0 with s = {s}")),
                    NullTest::NeedsNumeric => {
                        missing.push(format!("piece {i} on {}", piece.stratum));
                        (false, "needs-numeric".to_string())
                    }
                }
            }
        };
        pieces.push(PieceVerdict { piece: i, stratum: piece.stratum.clone(), regime: v.regime, removable, reason });
    }
    let removable = pieces.iter().all(|p| p.removable);
    if !missing.is_empty() && pieces.iter().all(|p| p.removable || p.reason == "needs-numeric") {
        return Err(Error::IncompleteEvidence(format!("needs-numeric ({})", missing.join("; "))));
    }
    Ok(RemovableReport { removable, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetPiece;

    fn cube_verdict(id: &str, q: f64) -> Verdict {
        let cube = PolyhedronSpec::cube();
        stratum_verdict(&cube, cube.stratum(id).unwrap(), q).unwrap()
    }

    #[test]
    fn cube_table_at_1_7() {
        let f = cube_verdict("F1", 1.7);
        assert_eq!(f.regime, Regime::Subcritical);
        assert_eq!(f.q_c, 2.0);
        let e = cube_verdict("E1", 1.7);
        assert_eq!(e.regime, Regime::CapacityRegime);
        assert!((e.q_c - 5.0 / 3.0).abs() < 1e-10 && (e.q_c_star - 2.0).abs() < 1e-10);
        assert!((e.s.unwrap() - (2.0 - 4.0 * 0.7 / 1.7)).abs() < 1e-10);
        let v = cube_verdict("V1", 1.7);
        assert_eq!(v.regime, Regime::VertexSupercritical);
        assert!(v.warning.is_none());
        assert!(cube_verdict("V1", 1.5).warning.is_some());
    }

    #[test]
    fn verdict_json_shape() {
        let s = serde_json::to_string(&cube_verdict("F2", 1.2)).unwrap();
        assert_eq!(
            s,
            r#"{"stratum":"F2","regime":"subcritical","q_c":2.0,"q_c_star":null,"s":null,"reason":"q < q_c: every measure on this stratum is good","warning":null}"#
        );
    }

    #[test]
    fn good_measure_examples() {
        let cube = PolyhedronSpec::cube();
        let on = |id: &str, m: usize| BTreeMap::from([(id.to_string(), DiscreteMeasure::dirac(vec![0.0; m], 1.0))]);
        let ev = CapacityEvidence::default();
        let r = good_measure_check(&cube, &on("V1", 0), 1.6, &ev).unwrap();
        assert_eq!(r.status, Status::Reject);
        assert_eq!(r.strata[0].reason, "μ(L) = 0 required");
        assert_eq!(good_measure_check(&cube, &on("E1", 1), 1.6, &ev).unwrap().status, Status::Accept);
        assert!(matches!(good_measure_check(&cube, &on("E1", 1), 1.7, &ev), Err(Error::IncompleteEvidence(_))));
        let ev = ev.with_point_evidence(&cube, &on("E1", 1), 1.7).unwrap();
        assert_eq!(ev.lookup("E1", 0), Some(NullTest::Null));
        assert_eq!(good_measure_check(&cube, &on("E1", 1), 1.7, &ev).unwrap().status, Status::Reject);
    }

    #[test]
    fn removability_examples() {
        let cube = PolyhedronSpec::cube();
        let set = |stratum: &str, shape: PieceShape| CompactSetDescription {
            pieces: vec![SetPiece { stratum: stratum.into(), shape }],
        };
        let ev = CapacityEvidence::default();
        let vertex = set("V1", PieceShape::Point { z: vec![] });
        assert!(removable_check(&cube, &vertex, 1.5, &ev).unwrap().removable);
        assert!(!removable_check(&cube, &vertex, 1.4, &ev).unwrap().removable);
        let pt = set("E1", PieceShape::Point { z: vec![0.0] });
        assert!(removable_check(&cube, &pt, 1.7, &ev).unwrap().removable);
        let seg = set("E1", PieceShape::Ball { center: vec![0.0], radius: 0.5, dim: Some(1) });
        assert!(!removable_check(&cube, &seg, 1.7, &ev).unwrap().removable);
        assert!(removable_check(&cube, &seg, 2.0, &ev).unwrap().removable);
        let grid = set("E1", PieceShape::Grid { points: vec![vec![0.0], vec![0.1]] });
        assert!(matches!(removable_check(&cube, &grid, 1.7, &ev), Err(Error::IncompleteEvidence(_))));
    }
}
