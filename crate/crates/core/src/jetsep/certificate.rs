use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{origin_membership, xi_max, XiMax};
use crate::ratgeom::{int, Polytope, PolytopeJson, Rational};
use crate::toric::{
    infinitesimal_body_fixed_point, Body, EnumerationLimits, EvaluationPoint, Multipoint, ToricDivisorData,
    ValuationKind,
};
use crate::{Error, Result, SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    #[serde(rename = "separates-k-jets-at-points")]
    SeparatesJets,
    #[serde(rename = "k-jet-ample-supported-on-Z")]
    JetAmpleOnSupport,
    #[serde(rename = "k-jet-ample")]
    JetAmple,
    #[serde(rename = "not-certified")]
    NotCertified,
}

/// Which criterion a certificate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `Δ⁻¹_{n+k+ε}` in the bodies of `D` gives `K_X + D`.
    Adjoint,
    /// `Δ⁻¹_{n+k+ε}` in the bodies of `mD` gives `(m + m(D)) D`.
    CanonicalFree,
    /// The canonical-free hypothesis at `k + 1` points gives `k`-jet
    /// ampleness.
    JetAmpleness,
}

/// Where a body comes from, which decides whether it may refuse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BodyBasis {
    Exact,
    /// Hull of normalized values up to `kmax`.
    InnerBound { kmax: u32 },
    /// A subset of the true body guaranteed by the named assumption.
    Cited { assumption: String },
}

impl BodyBasis {
    fn from_body(b: &Body) -> Self {
        if b.exact {
            BodyBasis::Exact
        } else {
            BodyBasis::InnerBound { kmax: b.kmax.unwrap_or(0) }
        }
    }
}

/// A body at one point for one flag (or flag tuple).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramedBody {
    pub flag: String,
    pub polytope: Polytope,
    pub basis: BodyBasis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointBodies {
    pub point: String,
    pub bodies: Vec<FramedBody>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyRecord {
    pub point: String,
    pub flag: String,
    pub polytope: PolytopeJson,
    pub basis: BodyBasis,
    pub origin_in_body: bool,
    /// `None` when the origin is outside the body.
    pub xi_max: Option<XiMax>,
}

/// `m(D)` with the argument that `m(D) D - K_X` is ample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierEvidence {
    pub value: i64,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inputs {
    pub n: usize,
    pub k: u32,
    pub divisor: String,
    pub m: Option<i64>,
    pub m_of_d: Option<MultiplierEvidence>,
    /// `m + m(D)`, the multiple of `D` in the conclusion.
    pub multiplier: Option<i64>,
    pub points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intermediate {
    /// `n + k`; the hypothesis is `ξ_max > threshold` at every body.
    pub threshold: i64,
    /// `None` when some body misses the origin.
    pub min_xi_max: Option<XiMax>,
    /// Index into `bodies` of the first body attaining the minimum.
    pub minimizer: Option<usize>,
    /// `min ξ_max - threshold` when positive: every smaller `ε > 0` works.
    pub epsilon_margin: Option<XiMax>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub name: String,
    pub statement: String,
    pub citation: Option<String>,
}

impl Assumption {
    pub fn new(name: &str, statement: &str, citation: Option<&str>) -> Self {
        Self { name: name.into(), statement: statement.into(), citation: citation.map(Into::into) }
    }
}

/// Name of the assumption that upgrades a supported-on-`Z` conclusion to
/// full `k`-jet ampleness.
pub const ALL_POINTS: &str = "all-points";
const INVARIANT_FRAMES: &str = "invariant-frames";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub theorem: Theorem,
    pub conclusion: Conclusion,
    pub statement: String,
    pub inputs: Inputs,
    pub bodies: Vec<BodyRecord>,
    pub flags_checked: Vec<String>,
    pub intermediate: Intermediate,
    pub assumptions: Vec<Assumption>,
    /// `Z` for jet-ampleness certificates.
    pub support: Option<Vec<String>>,
    /// Set when the criterion failed only on inner-bound bodies.
    pub inconclusive: Option<String>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.conclusion != Conclusion::NotCertified
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

fn records(n: usize, points: &[PointBodies]) -> Result<Vec<BodyRecord>> {
    let mut out = Vec::new();
    for pb in points {
        if pb.bodies.is_empty() {
            return Err(Error::MissingBodies(pb.point.clone()));
        }
        for b in &pb.bodies {
            if b.polytope.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.polytope.dim() });
            }
            let origin = origin_membership(&b.polytope);
            let xi = if origin { Some(xi_max(&b.polytope)?) } else { None };
            out.push(BodyRecord {
                point: pb.point.clone(),
                flag: b.flag.clone(),
                polytope: b.polytope.to_json(),
                basis: b.basis.clone(),
                origin_in_body: origin,
                xi_max: xi,
            });
        }
    }
    Ok(out)
}

fn points_of(records: &[BodyRecord]) -> Vec<String> {
    records.iter().map(|r| r.point.clone()).unique().collect()
}

struct Outcome {
    holds: bool,
    intermediate: Intermediate,
    inconclusive: Option<String>,
}

fn evaluate(records: &[BodyRecord], n: usize, k: u32) -> Outcome {
    let threshold = n as i64 + i64::from(k);
    let bound = int(threshold);
    let passes = |r: &BodyRecord| r.xi_max.as_ref().is_some_and(|x| x.exceeds(&bound));
    let holds = !records.is_empty() && records.iter().all(passes);

    // `None` (origin missing) sorts below every value.
    let minimizer = records.iter().position_min_by(|a, b| a.xi_max.cmp(&b.xi_max));
    let min_xi_max = minimizer.and_then(|i| records[i].xi_max.clone());
    let epsilon_margin = match &min_xi_max {
        Some(XiMax::Finite(x)) if x > &bound => Some(XiMax::Finite(x - &bound)),
        Some(XiMax::Infinite) => Some(XiMax::Infinite),
        _ => None,
    };

    let inconclusive = if holds {
        None
    } else {
        let failing: Vec<&BodyRecord> = records.iter().filter(|r| !passes(r)).collect();
        if failing.iter().any(|r| r.basis == BodyBasis::Exact) {
            None
        } else if let Some(kmax) = failing
            .iter()
            .filter_map(|r| match r.basis {
                BodyBasis::InnerBound { kmax } => Some(kmax),
                _ => None,
            })
            .max()
        {
            Some(format!("inconclusive at kmax {kmax}"))
        } else {
            Some("inconclusive: the cited inner bound is too small".into())
        }
    };
    Outcome { holds, intermediate: Intermediate { threshold, min_xi_max, minimizer, epsilon_margin }, inconclusive }
}

fn flags_checked(records: &[BodyRecord]) -> Vec<String> {
    records.iter().map(|r| format!("{} {}", r.point, r.flag)).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Assumptions named by cited bodies must be present, and computed bodies
/// only cover the frames they were computed for.
fn complete_assumptions(records: &[BodyRecord], mut given: Vec<Assumption>) -> Result<Vec<Assumption>> {
    for r in records {
        if let BodyBasis::Cited { assumption } = &r.basis {
            if !given.iter().any(|a| &a.name == assumption) {
                return Err(Error::InvalidInput(format!("body at {} cites unknown assumption {assumption}", r.point)));
            }
        }
    }
    let computed = records.iter().any(|r| !matches!(r.basis, BodyBasis::Cited { .. }));
    if computed && !given.iter().any(|a| a.name == INVARIANT_FRAMES) {
        given.push(Assumption::new(
            INVARIANT_FRAMES,
            "the hypothesis was checked only for the torus-invariant frames listed in flags_checked",
            None,
        ));
    }
    given.sort_by(|a, b| a.name.cmp(&b.name));
    given.dedup_by(|a, b| a.name == b.name);
    Ok(given)
}

fn jets(k: u32) -> String {
    format!("{k}-jets")
}

fn statement(theorem: Theorem, inputs: &Inputs, conclusion: Conclusion) -> String {
    let target = match theorem {
        Theorem::Adjoint => format!("K_X + {}", inputs.divisor),
        Theorem::CanonicalFree | Theorem::JetAmpleness => {
            let m = inputs.m.unwrap_or_default();
            let md = inputs.m_of_d.as_ref().map(|e| e.value).unwrap_or_default();
            format!("({m} + {md}) * {} = {} * {}", inputs.divisor, m + md, inputs.divisor)
        }
    };
    let pts = inputs.points.join(", ");
    let k = inputs.k;
    match conclusion {
        Conclusion::SeparatesJets => format!("{target} separates {} at {pts}", jets(k)),
        Conclusion::JetAmpleOnSupport => format!("{target} is {k}-jet ample supported on {{{pts}}}"),
        Conclusion::JetAmple => format!("{target} is {k}-jet ample"),
        Conclusion::NotCertified => format!("the criterion does not certify {target} for {} at {pts}", jets(k)),
    }
}

/// Builds the certificate from evaluated records. Deterministic in its
/// arguments, which is what [`verify`] relies on.
fn assemble(
    theorem: Theorem,
    inputs: Inputs,
    records: Vec<BodyRecord>,
    assumptions: Vec<Assumption>,
) -> Result<Certificate> {
    let assumptions = complete_assumptions(&records, assumptions)?;
    let outcome = evaluate(&records, inputs.n, inputs.k);
    let (conclusion, support) = match theorem {
        Theorem::Adjoint | Theorem::CanonicalFree => {
            (if outcome.holds { Conclusion::SeparatesJets } else { Conclusion::NotCertified }, None)
        }
        Theorem::JetAmpleness => {
            let everywhere = assumptions.iter().any(|a| a.name == ALL_POINTS);
            let c = match (outcome.holds, everywhere) {
                (false, _) => Conclusion::NotCertified,
                (true, false) => Conclusion::JetAmpleOnSupport,
                (true, true) => Conclusion::JetAmple,
            };
            (c, Some(inputs.points.clone()))
        }
    };
    Ok(Certificate {
        schema: SCHEMA.into(),
        theorem,
        conclusion,
        statement: statement(theorem, &inputs, conclusion),
        flags_checked: flags_checked(&records),
        inputs,
        bodies: records,
        intermediate: outcome.intermediate,
        assumptions,
        support,
        inconclusive: outcome.inconclusive,
    })
}

/// `K_X + D` separates `k`-jets at the points if every body of `D` at every
/// point contains `Δ⁻¹_{n+k+ε}`.
pub fn certify_adjoint(
    points: &[PointBodies],
    n: usize,
    k: u32,
    divisor: &str,
    assumptions: Vec<Assumption>,
) -> Result<Certificate> {
    let records = records(n, points)?;
    let inputs = Inputs {
        n,
        k,
        divisor: divisor.into(),
        m: None,
        m_of_d: None,
        multiplier: None,
        points: points_of(&records),
    };
    assemble(Theorem::Adjoint, inputs, records, assumptions)
}

fn canonical_free_inputs(
    records: &[BodyRecord],
    n: usize,
    k: u32,
    divisor: &str,
    m: i64,
    m_of_d: Option<MultiplierEvidence>,
) -> Result<Inputs> {
    if m < 1 {
        return Err(Error::InvalidInput(format!("m must be a positive integer, got {m}")));
    }
    let evidence = match m_of_d {
        Some(e) if !e.evidence.trim().is_empty() => e,
        Some(e) => return Err(Error::MissingEvidence(e.value)),
        None => return Err(Error::InvalidInput("m(D) must be supplied".into())),
    };
    Ok(Inputs {
        n,
        k,
        divisor: divisor.into(),
        m: Some(m),
        multiplier: Some(m + evidence.value),
        m_of_d: Some(evidence),
        points: points_of(records),
    })
}

/// `(m + m(D)) D` separates `k`-jets at the points if every body of `mD`
/// contains `Δ⁻¹_{n+k+ε}`. The bodies must already be those of `mD`.
pub fn certify_canonical_free(
    points: &[PointBodies],
    m: i64,
    m_of_d: Option<MultiplierEvidence>,
    n: usize,
    k: u32,
    divisor: &str,
    assumptions: Vec<Assumption>,
) -> Result<Certificate> {
    let records = records(n, points)?;
    let inputs = canonical_free_inputs(&records, n, k, divisor, m, m_of_d)?;
    assemble(Theorem::CanonicalFree, inputs, records, assumptions)
}

/// Combines canonical-free certificates covering at least `k + 1` distinct
/// points. The conclusion is supported on those points unless an
/// [`ALL_POINTS`] assumption is supplied.
pub fn certify_jet_ample(parts: &[Certificate], k: u32, all_points: Option<Assumption>) -> Result<Certificate> {
    let points: Vec<String> = parts.iter().flat_map(|c| c.inputs.points.iter().cloned()).unique().collect();
    let needed = k as usize + 1;
    if points.len() < needed {
        return Err(Error::TooFewPoints { expected: needed, found: points.len() });
    }
    let first = &parts[0];
    for c in parts {
        let same = c.theorem == Theorem::CanonicalFree
            && c.inputs.k == k
            && c.inputs.n == first.inputs.n
            && c.inputs.divisor == first.inputs.divisor
            && c.inputs.m == first.inputs.m
            && c.inputs.m_of_d == first.inputs.m_of_d;
        if !same {
            return Err(Error::InvalidInput(
                "jet ampleness needs canonical-free certificates for the same divisor, m and k".into(),
            ));
        }
    }
    let mut assumptions: Vec<Assumption> = parts.iter().flat_map(|c| c.assumptions.iter().cloned()).collect();
    if let Some(mut a) = all_points {
        a.name = ALL_POINTS.into();
        assumptions.push(a);
    }
    let records: Vec<BodyRecord> = parts.iter().flat_map(|c| c.bodies.iter().cloned()).collect();
    let mut inputs = first.inputs.clone();
    inputs.points = points;
    assemble(Theorem::JetAmpleness, inputs, records, assumptions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverVerdict {
    Certified,
    NotCertified,
}

/// On a degree-`d` cyclic cover `π` defined by `M`, `π^*L` is `k`-jet ample
/// if `L - qM` is `(k - q)`-jet ample for `q = 0..=min(k, d - 1)`. `checks[q]`
/// is that hypothesis. A false entry proves nothing either way.
pub fn cyclic_cover_rule(checks: &[bool], k: u32, d: u32) -> Result<CoverVerdict> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("cover degree must be at least 2, got {d}")));
    }
    let expected = k.min(d - 1) as usize + 1;
    if checks.len() != expected {
        return Err(Error::WrongArity { expected, found: checks.len() });
    }
    Ok(if checks.iter().all(|&c| c) { CoverVerdict::Certified } else { CoverVerdict::NotCertified })
}

/// Infinitesimal bodies at one fixed point, one per frame.
pub fn infinitesimal_point_bodies(
    t: &ToricDivisorData,
    vertex: &[i64],
    frames: &[Vec<usize>],
    kmax: u32,
    limits: EnumerationLimits,
) -> Result<PointBodies> {
    let point = EvaluationPoint::identity(vertex.to_vec());
    let mut bodies = Vec::with_capacity(frames.len());
    for f in frames {
        let p = point.with_frame(f.clone())?;
        let inf = infinitesimal_body_fixed_point(t, &p, kmax, limits)?;
        bodies.push(FramedBody {
            flag: frame_label(f),
            basis: BodyBasis::from_body(&inf.body),
            polytope: inf.body.polytope,
        });
    }
    Ok(PointBodies { point: vertex_label(vertex), bodies })
}

/// Multipoint infinitesimal bodies at several fixed points, one per tuple of
/// frames. Closed-form limits are used where available, otherwise the
/// enumeration up to `kmax`.
pub fn multipoint_point_bodies(
    t: &ToricDivisorData,
    vertices: &[Vec<i64>],
    frames: &[Vec<usize>],
    kmax: u32,
    limits: EnumerationLimits,
) -> Result<Vec<PointBodies>> {
    let mut out: Vec<PointBodies> =
        vertices.iter().map(|v| PointBodies { point: vertex_label(v), bodies: Vec::new() }).collect();
    for tuple in (0..vertices.len()).map(|_| frames.iter()).multi_cartesian_product() {
        let pts: Vec<EvaluationPoint> = vertices
            .iter()
            .zip(&tuple)
            .map(|(v, f)| EvaluationPoint::new(v.clone(), (*f).clone()))
            .collect::<Result<_>>()?;
        let mp = Multipoint::new(t, &pts, ValuationKind::Infinitesimal)?;
        let zero = Rational::from_integer(0.into());
        let limit = mp.limit_bodies(&zero)?;
        let enumerated = if limit.iter().any(Option::is_none) { Some(mp.enumerate(&zero, kmax, limits)?) } else { None };
        let flag = tuple.iter().map(|f| frame_label(f)).join(";");
        for (j, l) in limit.into_iter().enumerate() {
            let body = match l {
                Some(b) => b,
                None => enumerated.as_ref().expect("enumerated when a limit is missing")[j].clone(),
            };
            out[j].bodies.push(FramedBody {
                flag: flag.clone(),
                basis: BodyBasis::from_body(&body),
                polytope: body.polytope,
            });
        }
    }
    Ok(out)
}

pub fn vertex_label(v: &[i64]) -> String {
    format!("({})", v.iter().join(","))
}

pub fn frame_label(f: &[usize]) -> String {
    format!("[{}]", f.iter().join(""))
}

/// Result of re-checking a stored certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    pub mismatches: Vec<String>,
}

/// Re-derives the certificate from its stored bodies and inputs and reports
/// every field that differs.
pub fn verify(cert: &Certificate) -> Result<Verification> {
    let mut mismatches = Vec::new();
    if cert.schema != SCHEMA {
        mismatches.push(format!("schema {} is not {SCHEMA}", cert.schema));
    }
    let mut points: Vec<PointBodies> = Vec::new();
    for r in &cert.bodies {
        let polytope = Polytope::from_json(&r.polytope)?;
        let body = FramedBody { flag: r.flag.clone(), polytope, basis: r.basis.clone() };
        match points.iter_mut().find(|p| p.point == r.point) {
            Some(p) => p.bodies.push(body),
            None => points.push(PointBodies { point: r.point.clone(), bodies: vec![body] }),
        }
    }
    let records = records(cert.inputs.n, &points)?;
    for (i, (got, want)) in cert.bodies.iter().zip(&records).enumerate() {
        if got != want {
            mismatches.push(format!("body {i} at {} does not match its recomputation", got.point));
        }
    }
    if let Some(p) = cert.inputs.points.iter().find(|p| !records.iter().any(|r| &r.point == *p)) {
        mismatches.push(format!("declared point {p} has no bodies"));
    }

    let mut inputs = cert.inputs.clone();
    let given: Vec<Assumption> = cert.assumptions.clone();
    match cert.theorem {
        Theorem::Adjoint => inputs.points = points_of(&records),
        Theorem::CanonicalFree => {
            match canonical_free_inputs(&records, inputs.n, inputs.k, &inputs.divisor, inputs.m.unwrap_or(0), inputs.m_of_d.clone()) {
                Ok(i) => inputs = i,
                Err(e) => mismatches.push(format!("inputs: {e}")),
            }
        }
        Theorem::JetAmpleness => {
            if inputs.points.len() < inputs.k as usize + 1 {
                mismatches.push(format!("only {} points for {}", inputs.points.len(), jets(inputs.k)));
            }
            if let Err(e) =
                canonical_free_inputs(&records, inputs.n, inputs.k, &inputs.divisor, inputs.m.unwrap_or(0), inputs.m_of_d.clone())
            {
                mismatches.push(format!("inputs: {e}"));
            }
        }
    }
    let again = assemble(cert.theorem, inputs, records, given)?;
    let (a, b) = (serde_json::to_value(cert)?, serde_json::to_value(&again)?);
    if let (Some(a), Some(b)) = (a.as_object(), b.as_object()) {
        for (key, value) in b {
            if a.get(key) != Some(value) && key != "bodies" {
                mismatches.push(format!("field {key} does not match its recomputation"));
            }
        }
    }
    Ok(Verification { ok: mismatches.is_empty(), mismatches })
}
