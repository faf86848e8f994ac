use std::collections::BTreeSet;

use itertools::Itertools;
use num::{Signed, Zero};

use super::hull::{convex_hull, Constraint};
use super::linalg::{determinant, rank, solve_unique};
use super::{dot, factorial, Rational, RationalVector};
use crate::{Error, Result};

/// `<normal, x> <= offset`, or `<normal, x> = offset` when used as an equation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub normal: RationalVector,
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: RationalVector, offset: Rational) -> Self {
        Self { normal, offset }
    }

    pub fn value(&self, x: &RationalVector) -> Rational {
        self.normal.dot(x)
    }

    pub fn satisfied_by(&self, x: &RationalVector) -> bool {
        self.value(x) <= self.offset
    }

    fn from_constraint((a, b): Constraint) -> Self {
        Self { normal: RationalVector::new(a), offset: b }
    }
}

/// A convex polytope in `Q^dim`, possibly empty or lower-dimensional.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<RationalVector>,
    facets: Vec<Halfspace>,
    equations: Vec<Halfspace>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn empty(dim: usize) -> Self {
        Self { dim, vertices: vec![], facets: vec![], equations: vec![] }
    }

    pub fn point(p: RationalVector) -> Self {
        let dim = p.dim();
        Self::from_parts(dim, convex_hull(dim, vec![p]))
    }

    /// Convex hull of `points`, all of which must live in `Q^dim`.
    pub fn hull<I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = RationalVector>,
    {
        let points: Vec<RationalVector> = points.into_iter().collect();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(Self::from_parts(dim, convex_hull(dim, points)))
    }

    /// Hull of integer points.
    pub fn hull_of_ints(dim: usize, points: &[Vec<i64>]) -> Result<Self> {
        Self::hull(dim, points.iter().map(|p| RationalVector::from_ints(p)))
    }

    fn from_parts(dim: usize, parts: super::hull::HullParts) -> Self {
        let p = Self {
            dim,
            vertices: parts.vertices,
            facets: parts.facets.into_iter().map(Halfspace::from_constraint).collect(),
            equations: parts.equations.into_iter().map(Halfspace::from_constraint).collect(),
        };
        debug_assert!(p.vertices.iter().all(|v| p.contains_point(v)));
        p
    }

    /// The polytope `{x : eq(x) = b_eq, ineq(x) <= b_ineq}`. The constraint set
    /// must describe a bounded region; vertices are found by solving every
    /// square subsystem.
    pub fn from_halfspaces(dim: usize, equations: &[Halfspace], inequalities: &[Halfspace]) -> Result<Self> {
        for h in equations.iter().chain(inequalities) {
            if h.normal.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: h.normal.dim() });
            }
        }
        let eq_rows: Vec<Vec<Rational>> = equations.iter().map(|h| h.normal.coords().to_vec()).collect();
        let eq_rank = rank(&eq_rows, dim);
        let need = dim - eq_rank;
        let feasible = |x: &RationalVector| {
            equations.iter().all(|h| h.value(x) == h.offset) && inequalities.iter().all(|h| h.satisfied_by(x))
        };

        let mut candidates: BTreeSet<RationalVector> = BTreeSet::new();
        for combo in (0..inequalities.len()).combinations(need) {
            let mut rows = eq_rows.clone();
            let mut rhs: Vec<Rational> = equations.iter().map(|h| h.offset.clone()).collect();
            for &i in &combo {
                rows.push(inequalities[i].normal.coords().to_vec());
                rhs.push(inequalities[i].offset.clone());
            }
            if let Some(x) = solve_unique(&rows, &rhs, dim) {
                let x = RationalVector::new(x);
                if feasible(&x) {
                    candidates.insert(x);
                }
            }
        }
        Self::hull(dim, candidates)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn equations(&self) -> &[Halfspace] {
        &self.equations
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Dimension of the affine hull; `None` for the empty polytope.
    pub fn affine_dim(&self) -> Option<usize> {
        if self.is_empty() {
            None
        } else {
            Some(self.dim - self.equations.len())
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == Some(self.dim)
    }

    pub fn contains_point(&self, x: &RationalVector) -> bool {
        !self.is_empty()
            && x.dim() == self.dim
            && self.equations.iter().all(|h| h.value(x) == h.offset)
            && self.facets.iter().all(|h| h.satisfied_by(x))
    }

    /// `Q ⊆ self`, checked vertex by vertex. Boundary points count as inside.
    pub fn contains(&self, other: &Polytope) -> Result<bool> {
        self.check_dim(other.dim)?;
        Ok(other.vertices.iter().all(|v| self.contains_point(v)))
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        self.check_dim(other.dim)?;
        let sums = self.vertices.iter().cartesian_product(&other.vertices).map(|(a, b)| a.add(b));
        Polytope::hull(self.dim, sums)
    }

    pub fn translate(&self, v: &RationalVector) -> Result<Polytope> {
        self.check_dim(v.dim())?;
        let shift = |h: &Halfspace| Halfspace { normal: h.normal.clone(), offset: &h.offset + h.normal.dot(v) };
        let mut facets: Vec<Halfspace> = self.facets.iter().map(shift).collect();
        facets.sort();
        let mut equations: Vec<Halfspace> = self.equations.iter().map(shift).collect();
        equations.sort();
        Ok(Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|x| x.add(v)).collect(),
            facets,
            equations,
        })
    }

    /// `self ∩ {x_1 >= t}`.
    pub fn slice_ge(&self, t: &Rational) -> Polytope {
        if self.is_empty() {
            return self.clone();
        }
        let mut ineqs = self.facets.clone();
        ineqs.push(Halfspace::new(RationalVector::axis(self.dim, 0, Rational::from_integer((-1).into())), -t));
        self.intersect_with(&ineqs)
    }

    /// `self` cut by extra inequalities.
    pub fn intersect_halfspaces(&self, extra: &[Halfspace]) -> Result<Polytope> {
        if let Some(h) = extra.iter().find(|h| h.normal.dim() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: h.normal.dim() });
        }
        if self.is_empty() {
            return Ok(self.clone());
        }
        let mut ineqs = self.facets.clone();
        ineqs.extend(extra.iter().cloned());
        Ok(self.intersect_with(&ineqs))
    }

    fn intersect_with(&self, ineqs: &[Halfspace]) -> Polytope {
        Polytope::from_halfspaces(self.dim, &self.equations, ineqs)
            .expect("constraints share the polytope dimension")
    }

    /// `s * self` for `s >= 0`.
    pub fn scale(&self, s: &Rational) -> Polytope {
        assert!(!s.is_negative(), "negative dilation factor");
        Polytope::hull(self.dim, self.vertices.iter().map(|v| v.scale(s))).expect("same dimension")
    }

    /// Image under `x -> matrix * x + shift`, re-hulled. `matrix` is
    /// `out_dim x dim`.
    pub fn map_affine(&self, matrix: &[Vec<Rational>], shift: &RationalVector) -> Result<Polytope> {
        let out_dim = shift.dim();
        if let Some(row) = matrix.iter().find(|row| row.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: row.len() });
        }
        if matrix.len() != out_dim {
            return Err(Error::DimensionMismatch { expected: out_dim, found: matrix.len() });
        }
        let image = self.vertices.iter().map(|v| {
            RationalVector::new(matrix.iter().map(|row| dot(row, v.coords())).collect()).add(shift)
        });
        Polytope::hull(out_dim, image)
    }

    /// Euclidean `dim`-volume, exact. Lower-dimensional bodies have volume 0.
    pub fn volume(&self) -> Rational {
        if !self.is_full_dimensional() {
            return Rational::zero();
        }
        if self.dim == 0 {
            return Rational::from_integer(1.into());
        }
        let facet_sets: Vec<BTreeSet<usize>> = self
            .facets
            .iter()
            .map(|h| (0..self.vertices.len()).filter(|&i| h.value(&self.vertices[i]) == h.offset).collect())
            .collect();
        let all: BTreeSet<usize> = (0..self.vertices.len()).collect();
        let total: Rational = self
            .triangulate(&all, self.dim, &facet_sets)
            .iter()
            .map(|simplex| {
                let base = &self.vertices[simplex[0]];
                let rows: Vec<Vec<Rational>> =
                    simplex[1..].iter().map(|&i| self.vertices[i].sub(base).into_coords()).collect();
                determinant(&rows).abs()
            })
            .sum();
        total / factorial(self.dim)
    }

    /// Pulling triangulation of the face spanned by `face` (of dimension `d`)
    /// from its smallest vertex.
    fn triangulate(&self, face: &BTreeSet<usize>, d: usize, facet_sets: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
        let apex = *face.iter().next().expect("faces are nonempty");
        if d == 0 {
            return vec![vec![apex]];
        }
        let mut subfaces: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for g in facet_sets {
            let inter: BTreeSet<usize> = face.intersection(g).copied().collect();
            if inter.is_empty() || inter.contains(&apex) || inter.len() < d {
                continue;
            }
            if self.affine_dim_of(&inter) == d - 1 {
                subfaces.insert(inter);
            }
        }
        subfaces
            .iter()
            .flat_map(|sub| self.triangulate(sub, d - 1, facet_sets))
            .map(|mut s| {
                s.insert(0, apex);
                s
            })
            .collect()
    }

    fn affine_dim_of(&self, set: &BTreeSet<usize>) -> usize {
        let mut it = set.iter();
        let base = &self.vertices[*it.next().unwrap()];
        let rows: Vec<Vec<Rational>> = it.map(|&i| self.vertices[i].sub(base).into_coords()).collect();
        rank(&rows, self.dim)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found: other })
        }
    }
}
