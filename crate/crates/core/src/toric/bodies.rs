use std::collections::BTreeSet;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::oracle::{DivisorFamily, FamilyMember};
use super::{lattice_points, EnumerationLimits, EvaluationPoint, LocalChart, ToricDivisorData, ValuationKind};
use crate::ratgeom::{int, Halfspace, Polytope, Rational, RationalVector};
use crate::{Error, Result};

/// A body together with how much of it is known.
///
/// `exact` bodies are the true closure; otherwise the polytope is the hull of
/// the normalized values over levels `1..=kmax` and is an inner bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Body {
    pub polytope: Polytope,
    pub exact: bool,
    pub kmax: Option<u32>,
}

impl Body {
    pub fn exact(polytope: Polytope) -> Self {
        Self { polytope, exact: true, kmax: None }
    }

    pub fn label(&self) -> Exactness {
        if self.exact {
            Exactness::Exact
        } else {
            Exactness::InnerBound { kmax: self.kmax.unwrap_or(0) }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    InnerBound { kmax: u32 },
}

fn image(t: &ToricDivisorData, chart: &LocalChart) -> Polytope {
    let (a, b) = chart.affine_map();
    t.polytope().map_affine(&a, &b).expect("chart matches the polytope dimension")
}

/// The body of `D` for the torus-invariant admissible flag at `p`: the image
/// of `P` under the straightening map at `p`. Always exact.
pub fn okounkov_body_invariant_flag(t: &ToricDivisorData, p: &EvaluationPoint) -> Result<Body> {
    let chart = LocalChart::new(t, p, ValuationKind::Flag)?;
    Ok(Body::exact(image(t, &chart)))
}

#[derive(Clone, Debug)]
pub struct InfinitesimalBody {
    /// Hull over levels `1..=kmax`; marked exact when it equals the closed
    /// form.
    pub body: Body,
    /// Hull at level 1, the certified inner bound on its own.
    pub level_one: Polytope,
    /// Image of `P` under the infinitesimal valuation map.
    pub closed_form: Polytope,
}

/// Infinitesimal body of `D` at a smooth fixed point, enumerated up to
/// `kmax`.
pub fn infinitesimal_body_fixed_point(
    t: &ToricDivisorData,
    p: &EvaluationPoint,
    kmax: u32,
    limits: EnumerationLimits,
) -> Result<InfinitesimalBody> {
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be at least 1".into()));
    }
    let chart = LocalChart::new(t, p, ValuationKind::Infinitesimal)?;
    let n = t.dim();
    let mut level_one = None;
    let mut vertices: BTreeSet<RationalVector> = BTreeSet::new();
    for k in 1..=kmax {
        let values: Vec<Vec<i64>> =
            t.sections(k, limits)?.iter().map(|u| chart.value(u, i64::from(k))).collect();
        let level = normalized_hull(n, &values, k, &Rational::zero());
        if k == 1 {
            level_one = Some(level.clone());
        }
        vertices.extend(level.vertices().iter().cloned());
    }
    let polytope = Polytope::hull(n, vertices)?;
    let closed_form = image(t, &chart);
    let exact = polytope == closed_form;
    Ok(InfinitesimalBody {
        body: Body { polytope, exact, kmax: Some(kmax) },
        level_one: level_one.expect("kmax >= 1"),
        closed_form,
    })
}

/// `hull(values) / k - shift * e_1`.
fn normalized_hull(n: usize, values: &[Vec<i64>], k: u32, shift: &Rational) -> Polytope {
    let hull = Polytope::hull(n, values.iter().map(|v| RationalVector::from_ints(v))).expect("dimension");
    let inv_k = Rational::new(1.into(), k.into());
    let offset = RationalVector::axis(n, 0, -shift.clone());
    let moved = hull.vertices().iter().map(|v| v.scale(&inv_k).add(&offset));
    Polytope::hull(n, moved).expect("dimension")
}

/// Multipoint bodies of a toric divisor at several fixed points.
///
/// A section `chi^u` of `kD` is assigned to point `j` when its valuation at
/// `j` is strictly lex-smaller than at every other point; ties go nowhere.
#[derive(Clone, Debug)]
pub struct Multipoint<'a> {
    divisor: &'a ToricDivisorData,
    charts: Vec<LocalChart>,
}

impl<'a> Multipoint<'a> {
    pub fn new(t: &'a ToricDivisorData, points: &[EvaluationPoint], kind: ValuationKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { expected: 1, found: 0 });
        }
        let mut seen = BTreeSet::new();
        for p in points {
            if !seen.insert(&p.vertex) {
                return Err(Error::DuplicatePoint(RationalVector::from_ints(&p.vertex).to_string()));
            }
        }
        let charts = points.iter().map(|p| LocalChart::new(t, p, kind)).collect::<Result<_>>()?;
        Ok(Self { divisor: t, charts })
    }

    pub fn charts(&self) -> &[LocalChart] {
        &self.charts
    }

    /// `𝔻`: the first flag divisor at every marked point.
    pub fn family(&self) -> DivisorFamily {
        DivisorFamily::new(
            self.charts.iter().map(|c| FamilyMember { point: c.point().clone(), kind: c.kind() }).collect(),
        )
    }

    /// Single-point bodies with the same flags.
    pub fn single_point_bodies(&self) -> Vec<Body> {
        self.charts.iter().map(|c| Body::exact(image(self.divisor, c))).collect()
    }

    /// Enumerated bodies of `L - t𝔻` over levels `1..=kmax`, in the
    /// valuation coordinates of `L - t𝔻` (shifted by `-t e_1`).
    pub fn enumerate(&self, t: &Rational, kmax: u32, limits: EnumerationLimits) -> Result<Vec<Body>> {
        if kmax == 0 {
            return Err(Error::InvalidInput("kmax must be at least 1".into()));
        }
        if t.is_negative() {
            return Err(Error::InvalidInput("shift t must be nonnegative".into()));
        }
        let n = self.divisor.dim();
        let firsts: Vec<(Vec<i64>, i64)> = self.charts.iter().map(LocalChart::first_coordinate).collect();
        let mut vertices: Vec<BTreeSet<RationalVector>> = vec![BTreeSet::new(); self.charts.len()];
        for k in 1..=kmax {
            let k_i = i64::from(k);
            let kt = ceil_i64(&(t * int(k_i)));
            let bounds: Vec<(Vec<i64>, i64)> = firsts.iter().map(|(c, d)| (c.clone(), kt - k_i * d)).collect();
            let mut won: Vec<Vec<Vec<i64>>> = vec![Vec::new(); self.charts.len()];
            for u in lattice_points(self.divisor, k, &bounds, limits)? {
                let values: Vec<Vec<i64>> = self.charts.iter().map(|c| c.value(&u, k_i)).collect();
                if let Some(j) = strict_winner(&values) {
                    won[j].push(values[j].clone());
                }
            }
            for (j, vals) in won.iter().enumerate() {
                if !vals.is_empty() {
                    vertices[j].extend(normalized_hull(n, vals, k, t).vertices().iter().cloned());
                }
            }
        }
        vertices
            .into_iter()
            .map(|vs| Ok(Body { polytope: Polytope::hull(n, vs)?, exact: false, kmax: Some(kmax) }))
            .collect()
    }

    /// Closed-form limits of [`Multipoint::enumerate`] as `kmax -> inf`.
    ///
    /// The region of `P_t` won by point `j` is cut out by `g_ji <= 0`, where
    /// `g_ji` is the first valuation coordinate in which the two points'
    /// affine valuation maps differ. When that region is full-dimensional
    /// its interior is won strictly, so its image is the exact body. Empty
    /// regions give exact empty bodies; lower-dimensional regions have no
    /// closed form here and yield `None`.
    pub fn limit_bodies(&self, t: &Rational) -> Result<Vec<Option<Body>>> {
        let n = self.divisor.dim();
        let maps: Vec<(Vec<Vec<Rational>>, RationalVector)> = self.charts.iter().map(LocalChart::affine_map).collect();
        let base = self.family().restricted_polytope(self.divisor, t)?;
        let shift = RationalVector::axis(n, 0, -t.clone());

        let mut out = Vec::with_capacity(self.charts.len());
        for (j, (aj, bj)) in maps.iter().enumerate() {
            let mut cuts: Vec<Halfspace> = Vec::new();
            let mut hopeless = false;
            for (i, (ai, bi)) in maps.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut decided = false;
                for r in 0..n {
                    let lin: Vec<Rational> = (0..n).map(|c| &aj[r][c] - &ai[r][c]).collect();
                    let cst = &bj[r] - &bi[r];
                    if lin.iter().all(Zero::is_zero) {
                        if cst.is_zero() {
                            continue;
                        }
                        hopeless |= cst.is_positive();
                        decided = true;
                        break;
                    }
                    cuts.push(Halfspace::new(RationalVector::new(lin), -cst));
                    decided = true;
                    break;
                }
                // Identical valuations tie on every section.
                hopeless |= !decided;
            }
            let region = if hopeless { Polytope::empty(n) } else { base.intersect_halfspaces(&cuts)? };
            let body = if region.is_empty() {
                Some(Body::exact(Polytope::empty(n)))
            } else if region.is_full_dimensional() {
                let img = region.map_affine(aj, bj)?.translate(&shift)?;
                Some(Body::exact(img))
            } else {
                None
            };
            out.push(body);
        }
        Ok(out)
    }
}

/// Index `j` with `values[j] <lex values[i]` for every `i != j`.
fn strict_winner(values: &[Vec<i64>]) -> Option<usize> {
    let (j, best) = values.iter().enumerate().min_by(|a, b| a.1.cmp(b.1))?;
    values.iter().enumerate().all(|(i, v)| i == j || best < v).then_some(j)
}

fn ceil_i64(r: &Rational) -> i64 {
    use num::ToPrimitive;
    r.ceil().to_integer().to_i64().expect("level bound fits in i64")
}

/// Enumerated multipoint bodies of `D` (no shift).
pub fn multipoint_bodies(
    t: &ToricDivisorData,
    points: &[EvaluationPoint],
    kind: ValuationKind,
    kmax: u32,
    limits: EnumerationLimits,
) -> Result<Vec<Body>> {
    Multipoint::new(t, points, kind)?.enumerate(&Rational::zero(), kmax, limits)
}
