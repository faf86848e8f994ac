use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    infinitesimal_body_fixed_point, local_exponents, EnumerationLimits, EvaluationPoint, LocalChart,
    ToricDivisorData, ValuationKind,
};
use crate::ratgeom::linalg::solve_unique;
use crate::ratgeom::{int, Halfspace, Polytope, Rational, RationalVector};
use crate::valuation::{flag_valuation, infinitesimal_valuation, LexOrder, MonomialSection, ValuationVector};
use crate::{Error, Result};

/// One component `D_j` of `𝔻`: the first divisor of the flag at a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub point: EvaluationPoint,
    pub kind: ValuationKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorFamily {
    members: Vec<FamilyMember>,
}

impl DivisorFamily {
    pub fn new(members: Vec<FamilyMember>) -> Self {
        Self { members }
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// `f_j(x) = c . x + d`, the normalized order along each member.
    fn functionals(&self, t: &ToricDivisorData) -> Result<Vec<(Vec<i64>, i64)>> {
        self.members
            .iter()
            .map(|m| Ok(LocalChart::new(t, &m.point, m.kind)?.first_coordinate()))
            .collect()
    }

    /// The region of `P` supporting `L - t𝔻`: `P ∩ {f_j >= t for all j}`.
    pub fn restricted_polytope(&self, divisor: &ToricDivisorData, t: &Rational) -> Result<Polytope> {
        let cuts: Vec<Halfspace> = self
            .functionals(divisor)?
            .into_iter()
            .map(|(c, d)| {
                let neg: Vec<i64> = c.iter().map(|x| -x).collect();
                Halfspace::new(RationalVector::from_ints(&neg), int(d) - t)
            })
            .collect();
        divisor.polytope().intersect_halfspaces(&cuts)
    }
}

/// `mu(L; 𝔻) = sup{t >= 0 : L - t𝔻 is big}`: the largest `t` for which the
/// restricted polytope keeps interior, i.e. `max_{x in P} min_j f_j(x)`.
///
/// Solved exactly as a small LP over `(x, s)` by enumerating basic
/// solutions.
pub fn compute_mu(t: &ToricDivisorData, family: &DivisorFamily) -> Result<Rational> {
    if family.members.is_empty() {
        return Err(Error::UnboundedFamily);
    }
    let n = t.dim();
    let mut rows: Vec<(Vec<Rational>, Rational)> = t
        .polytope()
        .facets()
        .iter()
        .map(|h| {
            let mut a = h.normal.coords().to_vec();
            a.push(int(0));
            (a, h.offset.clone())
        })
        .collect();
    // s - f_j(x) <= 0
    for (c, d) in family.functionals(t)? {
        let mut a: Vec<Rational> = c.iter().map(|&x| int(-x)).collect();
        a.push(int(1));
        rows.push((a, int(d)));
    }
    let feasible = |x: &[Rational]| rows.iter().all(|(a, b)| crate::ratgeom::dot(a, x) <= *b);
    let mut best: Option<Rational> = None;
    for combo in (0..rows.len()).combinations(n + 1) {
        let a: Vec<Vec<Rational>> = combo.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Rational> = combo.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = solve_unique(&a, &b, n + 1) {
            if feasible(&x) && best.as_ref().is_none_or(|s| x[n] > *s) {
                best = Some(x[n].clone());
            }
        }
    }
    Ok(best.expect("a full-dimensional polytope gives a feasible LP"))
}

/// Whether `D` separates `k`-jets at the fixed point `p`.
///
/// The monomials form a basis of sections diagonal in the local
/// coordinates, so the jet map is onto exactly when every exponent of total
/// degree at most `k` is realized.
pub fn jet_oracle_fixed_point(t: &ToricDivisorData, p: &EvaluationPoint, k: u32) -> Result<bool> {
    let exps: BTreeSet<Vec<i64>> = local_exponents(t, p, 1, EnumerationLimits::default())?.into_iter().collect();
    let n = t.dim();
    let k = i64::from(k);
    let all_covered = (0..n)
        .map(|_| 0..=k)
        .multi_cartesian_product()
        .filter(|a| a.iter().sum::<i64>() <= k)
        .all(|a| exps.contains(&a));
    Ok(all_covered)
}

/// Values of all monomial sections of `kD` at `p`, for each level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigroupSample {
    pub level: u32,
    pub points: Vec<ValuationVector>,
}

impl SemigroupSample {
    pub fn normalized(&self) -> Vec<RationalVector> {
        let inv = Rational::new(1.into(), self.level.into());
        self.points.iter().map(|v| v.to_rational().scale(&inv)).collect()
    }
}

pub fn semigroup_samples(
    t: &ToricDivisorData,
    p: &EvaluationPoint,
    kind: ValuationKind,
    kmax: u32,
    limits: EnumerationLimits,
) -> Result<Vec<SemigroupSample>> {
    let chart = LocalChart::new(t, p, kind)?;
    (1..=kmax)
        .map(|k| {
            let points = t.sections(k, limits)?.iter().map(|u| ValuationVector(chart.value(u, i64::from(k)))).collect();
            Ok(SemigroupSample { level: k, points })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub seed: u64,
    pub kmax: u32,
    pub samples_per_level: usize,
    pub checked: usize,
    /// `(level, value)` pairs whose normalization falls outside the
    /// monomial body.
    pub outside: Vec<(u32, ValuationVector)>,
}

/// Samples random sections (random sparse combinations of monomials with
/// random nonzero coefficients) at each level and checks that their values
/// stay inside the body computed from monomial values alone.
pub fn random_section_oracle(
    t: &ToricDivisorData,
    p: &EvaluationPoint,
    kind: ValuationKind,
    kmax: u32,
    samples_per_level: usize,
    seed: u64,
    limits: EnumerationLimits,
) -> Result<SamplingReport> {
    let body = match kind {
        ValuationKind::Infinitesimal => infinitesimal_body_fixed_point(t, p, kmax, limits)?.body.polytope,
        ValuationKind::Flag => super::okounkov_body_invariant_flag(t, p)?.polytope,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outside = Vec::new();
    let mut checked = 0;
    for k in 1..=kmax {
        let exps = local_exponents(t, p, k, limits)?;
        let inv = Rational::new(1.into(), k.into());
        for _ in 0..samples_per_level {
            let size = rng.gen_range(1..=exps.len().min(4));
            let terms: Vec<Vec<i64>> = sample(&mut rng, exps.len(), size).iter().map(|i| exps[i].clone()).collect();
            // Coefficients are nonzero markers; distinct monomials never cancel.
            let _coefficients: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=9) * if rng.gen() { 1 } else { -1 }).collect();
            let section = MonomialSection::new(terms)?;
            let value = match kind {
                ValuationKind::Infinitesimal => infinitesimal_valuation(&section),
                ValuationKind::Flag => flag_valuation(&section, LexOrder::LeftToRight),
            };
            checked += 1;
            if !body.contains_point(&value.to_rational().scale(&inv)) {
                outside.push((k, value));
            }
        }
    }
    Ok(SamplingReport { seed, kmax, samples_per_level, checked, outside })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::frac;

    fn family(points: &[Vec<i64>], kind: ValuationKind) -> DivisorFamily {
        DivisorFamily::new(
            points.iter().map(|v| FamilyMember { point: EvaluationPoint::identity(v.clone()), kind }).collect(),
        )
    }

    #[test]
    fn mu_examples() {
        let line = ToricDivisorData::projective_space(1, 2);
        assert_eq!(compute_mu(&line, &family(&[vec![0], vec![2]], ValuationKind::Flag)).unwrap(), int(1));
        for d in 1..6 {
            let plane = ToricDivisorData::projective_space(2, d);
            for kind in [ValuationKind::Flag, ValuationKind::Infinitesimal] {
                let mu = compute_mu(&plane, &family(&[vec![0, 0]], kind)).unwrap();
                assert_eq!(mu, int(d));
                assert!(mu > int(0));
            }
        }
        // Opposite corners of the unit square, exceptional divisors: x+y >= t
        // and (1-x)+(1-y) >= t meet at t = 1.
        let sq = ToricDivisorData::product_of_lines(&[1, 1]);
        let mu = compute_mu(&sq, &family(&[vec![0, 0], vec![1, 1]], ValuationKind::Infinitesimal)).unwrap();
        assert_eq!(mu, int(1));
        // At (0,1) the three orders are 1, 2 and 1.
        let mu = compute_mu(&sq, &family(&[vec![0, 0], vec![1, 0], vec![1, 1]], ValuationKind::Infinitesimal)).unwrap();
        assert_eq!(mu, int(1));
        assert!(matches!(compute_mu(&sq, &DivisorFamily::new(vec![])), Err(Error::UnboundedFamily)));
    }

    #[test]
    fn restricted_polytope_shrinks_the_interval() {
        let line = ToricDivisorData::projective_space(1, 2);
        let f = family(&[vec![0], vec![2]], ValuationKind::Flag);
        let p = f.restricted_polytope(&line, &frac(1, 4)).unwrap();
        let want = Polytope::hull(1, vec![RationalVector::new(vec![frac(1, 4)]), RationalVector::new(vec![frac(7, 4)])])
            .unwrap();
        assert_eq!(p, want);
        assert_eq!(f.restricted_polytope(&line, &int(1)).unwrap().affine_dim(), Some(0));
    }

    #[test]
    fn jet_oracle_examples() {
        for d in 0..6u32 {
            let t = ToricDivisorData::projective_space(2, i64::from(d).max(1));
            let d = d.max(1);
            let p = EvaluationPoint::identity(vec![0, 0]);
            assert!(jet_oracle_fixed_point(&t, &p, d).unwrap());
            assert!(!jet_oracle_fixed_point(&t, &p, d + 1).unwrap());
        }
        let line = ToricDivisorData::projective_space(1, 2);
        let p = EvaluationPoint::identity(vec![0]);
        assert!(jet_oracle_fixed_point(&line, &p, 2).unwrap());
        assert!(!jet_oracle_fixed_point(&line, &p, 3).unwrap());
        // Every box [0,a]x[0,b] separates min(a,b)-jets at a corner.
        let bx = ToricDivisorData::product_of_lines(&[3, 2]);
        let p = EvaluationPoint::identity(vec![3, 2]);
        assert!(jet_oracle_fixed_point(&bx, &p, 2).unwrap());
        assert!(!jet_oracle_fixed_point(&bx, &p, 3).unwrap());
        assert!(jet_oracle_fixed_point(&bx, &p, 0).unwrap());
    }

    #[test]
    fn samples_normalize_into_the_body() {
        let t = ToricDivisorData::from_vertices(2, &[vec![0, 0], vec![3, 0], vec![3, 1], vec![0, 2]]).unwrap();
        let p = EvaluationPoint::identity(vec![0, 0]);
        let body = infinitesimal_body_fixed_point(&t, &p, 1, EnumerationLimits::default()).unwrap();
        for s in semigroup_samples(&t, &p, ValuationKind::Infinitesimal, 4, EnumerationLimits::default()).unwrap() {
            for x in s.normalized() {
                assert!(body.closed_form.contains_point(&x), "{x}");
            }
        }
    }

    #[test]
    fn random_sections_stay_inside_and_are_reproducible() {
        let t = ToricDivisorData::product_of_lines(&[2, 3]);
        let p = EvaluationPoint::new(vec![2, 0], vec![1, 0]).unwrap();
        let lim = EnumerationLimits::default();
        for kind in [ValuationKind::Flag, ValuationKind::Infinitesimal] {
            let a = random_section_oracle(&t, &p, kind, 3, 50, 7, lim).unwrap();
            assert!(a.outside.is_empty());
            assert_eq!(a.checked, 150);
            assert_eq!(a, random_section_oracle(&t, &p, kind, 3, 50, 7, lim).unwrap());
        }
    }
}
