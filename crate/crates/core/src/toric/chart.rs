use num::{Signed, Zero};

use super::{dot_i, EnumerationLimits, EvaluationPoint, ToricDivisorData, ValuationKind};
use crate::ratgeom::linalg::{determinant, inverse, null_space, primitive};
use crate::ratgeom::{int, Rational, RationalVector};
use crate::{Error, Result};

/// Local coordinates at a smooth fixed point, with the valuation read off
/// them.
///
/// `matrix` is the cone-straightening map with its rows already permuted by
/// the frame, so the `i`-th local exponent of `chi^u` at level `k` is
/// `matrix[i] . (u - k v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalChart {
    point: EvaluationPoint,
    matrix: Vec<Vec<i64>>,
    kind: ValuationKind,
}

impl LocalChart {
    pub fn new(t: &ToricDivisorData, p: &EvaluationPoint, kind: ValuationKind) -> Result<Self> {
        let n = t.dim();
        if p.vertex.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.vertex.len() });
        }
        let v = RationalVector::from_ints(&p.vertex);
        let label = || v.to_string();
        if !t.polytope().vertices().contains(&v) {
            return Err(Error::InvalidInput(format!("{} is not a vertex of the polytope", label())));
        }
        let tight: Vec<Vec<Rational>> = t
            .polytope()
            .facets()
            .iter()
            .filter(|h| h.value(&v) == h.offset)
            .map(|h| h.normal.coords().to_vec())
            .collect();
        if tight.len() != n {
            return Err(Error::NonSmoothVertex {
                vertex: label(),
                reason: format!("{} facets meet at the vertex, expected {n}", tight.len()),
            });
        }

        // Edge j leaves every tight facet except facet j.
        let mut edges: Vec<Vec<i64>> = Vec::with_capacity(n);
        for j in 0..n {
            let others: Vec<Vec<Rational>> =
                tight.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, a)| a.clone()).collect();
            let ns = null_space(&others, n);
            let (mut d, _) = primitive(&ns[0]);
            let along: Rational = crate::ratgeom::dot(&tight[j], &d);
            if along.is_positive() {
                d.iter_mut().for_each(|x| *x = -x.clone());
            }
            edges.push(RationalVector::new(d).to_i64().expect("primitive integer edge"));
        }
        edges.sort_by(|a, b| b.cmp(a));

        let cols: Vec<Vec<Rational>> =
            (0..n).map(|r| (0..n).map(|c| int(edges[c][r])).collect()).collect();
        let det = determinant(&cols);
        if det.abs() != int(1) {
            return Err(Error::NonSmoothVertex {
                vertex: label(),
                reason: format!("tangent cone has multiplicity {}", det.abs()),
            });
        }
        let inv = inverse(&cols).expect("unimodular");
        let straight: Vec<Vec<i64>> =
            inv.iter().map(|row| RationalVector::new(row.clone()).to_i64().expect("integral inverse")).collect();
        let matrix = p.frame.iter().map(|&i| straight[i].clone()).collect();
        Ok(Self { point: p.clone(), matrix, kind })
    }

    pub fn point(&self) -> &EvaluationPoint {
        &self.point
    }

    pub fn kind(&self) -> ValuationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Local exponent of `chi^u`, a section of `kD`.
    pub fn exponent(&self, u: &[i64], k: i64) -> Vec<i64> {
        let shifted: Vec<i64> = u.iter().zip(&self.point.vertex).map(|(a, v)| a - k * v).collect();
        self.matrix.iter().map(|row| dot_i(row, &shifted)).collect()
    }

    /// Valuation of `chi^u` for this chart's kind.
    pub fn value(&self, u: &[i64], k: i64) -> Vec<i64> {
        let mut w = self.exponent(u, k);
        if self.kind == ValuationKind::Infinitesimal {
            w[0] = w.iter().sum();
        }
        w
    }

    /// Linear part `L` of the normalized valuation `x -> L (x - v)`.
    pub fn linear_part(&self) -> Vec<Vec<i64>> {
        match self.kind {
            ValuationKind::Flag => self.matrix.clone(),
            ValuationKind::Infinitesimal => {
                let n = self.dim();
                let first: Vec<i64> = (0..n).map(|c| self.matrix.iter().map(|row| row[c]).sum()).collect();
                std::iter::once(first).chain(self.matrix[1..].iter().cloned()).collect()
            }
        }
    }

    /// The normalized valuation as an affine map `x -> A x + b` on `Q^n`.
    pub fn affine_map(&self) -> (Vec<Vec<Rational>>, RationalVector) {
        let lin = self.linear_part();
        let a: Vec<Vec<Rational>> = lin.iter().map(|row| row.iter().map(|&x| int(x)).collect()).collect();
        let b = RationalVector::new(lin.iter().map(|row| int(-dot_i(row, &self.point.vertex))).collect());
        (a, b)
    }

    /// First valuation coordinate as `x -> c . x + d`: the order of vanishing
    /// along the first flag divisor.
    pub fn first_coordinate(&self) -> (Vec<i64>, i64) {
        let c = self.linear_part().swap_remove(0);
        let d = -dot_i(&c, &self.point.vertex);
        (c, d)
    }
}

/// `{M (u - k v) : u in kP}` at the point `p`, in the order of the lattice
/// points of `kP`.
pub fn local_exponents(
    t: &ToricDivisorData,
    p: &EvaluationPoint,
    k: u32,
    limits: EnumerationLimits,
) -> Result<Vec<Vec<i64>>> {
    let chart = LocalChart::new(t, p, ValuationKind::Flag)?;
    let k_i = i64::from(k);
    let out: Vec<Vec<i64>> = t.sections(k, limits)?.iter().map(|u| chart.exponent(u, k_i)).collect();
    debug_assert!(out.iter().all(|w| w.iter().all(|x| !x.is_negative() || x.is_zero())));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn lim() -> EnumerationLimits {
        EnumerationLimits::default()
    }

    #[test]
    fn standard_vertex_needs_no_straightening() {
        for d in 1..5 {
            let t = ToricDivisorData::projective_space(2, d);
            let got: BTreeSet<Vec<i64>> =
                local_exponents(&t, &EvaluationPoint::identity(vec![0, 0]), 1, lim()).unwrap().into_iter().collect();
            let want: BTreeSet<Vec<i64>> =
                (0..=d).flat_map(|a| (0..=d - a).map(move |b| vec![a, b])).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn opposite_vertex_is_straightened() {
        let t = ToricDivisorData::projective_space(2, 2);
        let exps = local_exponents(&t, &EvaluationPoint::identity(vec![2, 0]), 1, lim()).unwrap();
        assert_eq!(exps.len(), 6);
        assert!(exps.iter().all(|w| w.iter().all(|&x| x >= 0)));
        // The exponents are again those of the size-2 simplex.
        let set: BTreeSet<Vec<i64>> = exps.into_iter().collect();
        let want: BTreeSet<Vec<i64>> = (0..=2).flat_map(|a| (0..=2 - a).map(move |b| vec![a, b])).collect();
        assert_eq!(set, want);
    }

    #[test]
    fn the_vertex_maps_to_the_origin() {
        let t = ToricDivisorData::from_vertices(2, &[vec![0, 0], vec![3, 0], vec![3, 1], vec![0, 2]]).unwrap();
        for v in [vec![0, 0], vec![3, 0], vec![3, 1], vec![0, 2]] {
            let chart = LocalChart::new(&t, &EvaluationPoint::identity(v.clone()), ValuationKind::Flag);
            match chart {
                Ok(c) => assert_eq!(c.exponent(&v, 1), vec![0, 0]),
                Err(Error::NonSmoothVertex { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn singular_vertex_is_reported() {
        // The cone at the origin is spanned by (1,0) and (1,2): multiplicity 2.
        let t = ToricDivisorData::from_vertices(2, &[vec![0, 0], vec![2, 0], vec![1, 2]]).unwrap();
        let err = LocalChart::new(&t, &EvaluationPoint::identity(vec![0, 0]), ValuationKind::Flag).unwrap_err();
        assert!(matches!(err, Error::NonSmoothVertex { .. }));
        // A square pyramid apex has four facets.
        let pyr = ToricDivisorData::from_vertices(
            3,
            &[vec![0, 0, 0], vec![2, 0, 0], vec![0, 2, 0], vec![2, 2, 0], vec![1, 1, 1]],
        )
        .unwrap();
        assert!(matches!(
            LocalChart::new(&pyr, &EvaluationPoint::identity(vec![1, 1, 1]), ValuationKind::Flag),
            Err(Error::NonSmoothVertex { .. })
        ));
    }

    #[test]
    fn non_vertex_is_rejected() {
        let t = ToricDivisorData::projective_space(2, 2);
        assert!(LocalChart::new(&t, &EvaluationPoint::identity(vec![1, 0]), ValuationKind::Flag).is_err());
    }

    #[test]
    fn frame_permutes_local_axes() {
        let t = ToricDivisorData::product_of_lines(&[2, 1]);
        let id = LocalChart::new(&t, &EvaluationPoint::identity(vec![0, 0]), ValuationKind::Flag).unwrap();
        let sw = LocalChart::new(&t, &EvaluationPoint::new(vec![0, 0], vec![1, 0]).unwrap(), ValuationKind::Flag)
            .unwrap();
        assert_eq!(id.exponent(&[2, 1], 1), vec![2, 1]);
        assert_eq!(sw.exponent(&[2, 1], 1), vec![1, 2]);
        let inf = LocalChart::new(&t, &EvaluationPoint::identity(vec![0, 0]), ValuationKind::Infinitesimal).unwrap();
        assert_eq!(inf.value(&[2, 1], 1), vec![3, 1]);
        assert_eq!(inf.first_coordinate(), (vec![1, 1], 0));
    }
}
