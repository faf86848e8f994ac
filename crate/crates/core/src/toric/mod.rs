//! Toric divisors as lattice polytopes, and the bodies and oracles built on
//! their lattice points.
//!
//! Sections of `kD` are the lattice points of `kP`. At a smooth torus-fixed
//! point (a vertex of `P` with a unimodular tangent cone) the monomial
//! `chi^u` has local exponent `M (u - k v)`, where `M` straightens the cone
//! at `v` onto the positive orthant. Every valuation used here is read off
//! those exponents.

mod bodies;
mod chart;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::ratgeom::{Polytope, PolytopeJson, RationalVector};
use crate::{Error, Result};

pub use bodies::{
    infinitesimal_body_fixed_point, multipoint_bodies, okounkov_body_invariant_flag, Body, InfinitesimalBody,
    Multipoint,
};
pub use chart::{local_exponents, LocalChart};
pub use oracle::{
    compute_mu, jet_oracle_fixed_point, random_section_oracle, semigroup_samples, DivisorFamily, FamilyMember,
    SamplingReport, SemigroupSample,
};

/// Default lattice-point cap per level.
pub const DEFAULT_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub cap: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

/// Which valuation a body is built from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValuationKind {
    /// Torus-invariant admissible flag at the point.
    Flag,
    /// Infinitesimal flag over the point (exceptional divisor first).
    #[default]
    Infinitesimal,
}

/// A full-dimensional lattice polytope `P` standing for a toric divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricDivisorData {
    polytope: Polytope,
    /// Facets as integer rows `a . u <= b`.
    lattice_facets: Vec<(Vec<i64>, i64)>,
}

impl ToricDivisorData {
    pub fn new(polytope: Polytope) -> Result<Self> {
        if polytope.is_empty() || !polytope.is_full_dimensional() {
            return Err(Error::InvalidInput("toric polytope must be full-dimensional".into()));
        }
        if let Some(v) = polytope.vertices().iter().find(|v| v.to_i64().is_none()) {
            return Err(Error::InvalidInput(format!("vertex {v} is not a lattice point")));
        }
        let lattice_facets = polytope
            .facets()
            .iter()
            .map(|h| {
                let a = h.normal.to_i64().expect("facet normals of lattice polytopes are primitive integers");
                let b = RationalVector::new(vec![h.offset.clone()]).to_i64().expect("integral offset")[0];
                (a, b)
            })
            .collect();
        Ok(Self { polytope, lattice_facets })
    }

    pub fn from_vertices(dim: usize, vertices: &[Vec<i64>]) -> Result<Self> {
        Self::new(Polytope::hull_of_ints(dim, vertices)?)
    }

    /// `O(d)` on `P^n`: the simplex of size `d`.
    pub fn projective_space(n: usize, d: i64) -> Self {
        let mut v = vec![vec![0; n]];
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = d;
            v.push(e);
        }
        Self::from_vertices(n, &v).expect("simplex is full-dimensional")
    }

    /// `O(a_1, ..., a_n)` on `(P^1)^n`: the box `prod [0, a_i]`.
    pub fn product_of_lines(sizes: &[i64]) -> Self {
        let n = sizes.len();
        let vertices: Vec<Vec<i64>> = (0..1usize << n)
            .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { sizes[i] } else { 0 }).collect())
            .collect();
        Self::from_vertices(n, &vertices).expect("box is full-dimensional")
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    /// `sD`, i.e. the polytope `sP`.
    pub fn scaled(&self, s: i64) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidInput("divisor multiple must be positive".into()));
        }
        Self::new(self.polytope.scale(&crate::ratgeom::int(s)))
    }

    /// `D_1 + D_2`, i.e. `P_1 + P_2`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        Self::new(self.polytope.minkowski_sum(&other.polytope)?)
    }

    /// All lattice points of `kP`.
    pub fn sections(&self, k: u32, limits: EnumerationLimits) -> Result<Vec<Vec<i64>>> {
        sections(self, k, limits)
    }
}

/// A torus-fixed point (vertex of `P`) with an ordering of its local axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub vertex: Vec<i64>,
    pub frame: Vec<usize>,
}

impl EvaluationPoint {
    pub fn new(vertex: Vec<i64>, frame: Vec<usize>) -> Result<Self> {
        let mut sorted = frame.clone();
        sorted.sort_unstable();
        if sorted != (0..vertex.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidInput(format!("frame {frame:?} is not a permutation of the local axes")));
        }
        Ok(Self { vertex, frame })
    }

    pub fn identity(vertex: Vec<i64>) -> Self {
        let frame = (0..vertex.len()).collect();
        Self { vertex, frame }
    }

    /// The same fixed point on `sP`.
    pub fn scaled(&self, s: i64) -> Self {
        Self { vertex: self.vertex.iter().map(|x| x * s).collect(), frame: self.frame.clone() }
    }

    pub fn with_frame(&self, frame: Vec<usize>) -> Result<Self> {
        Self::new(self.vertex.clone(), frame)
    }

    pub fn label(&self) -> String {
        let v: Vec<String> = self.vertex.iter().map(i64::to_string).collect();
        let f: Vec<String> = self.frame.iter().map(usize::to_string).collect();
        format!("({})[{}]", v.join(","), f.join(""))
    }
}

/// Every ordering of `n` local axes, in lexicographic order.
pub fn all_frames(n: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).permutations(n).collect()
}

/// Input document: a lattice polytope and marked fixed points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToricInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub polytope: PolytopeJson,
    #[serde(default)]
    pub points: Vec<PointJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointJson {
    pub vertex: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<usize>>,
}

impl ToricInstance {
    pub fn divisor(&self) -> Result<ToricDivisorData> {
        ToricDivisorData::new(Polytope::from_json(&self.polytope)?)
    }

    pub fn points(&self) -> Result<Vec<EvaluationPoint>> {
        self.points
            .iter()
            .map(|p| match &p.frame {
                Some(f) => EvaluationPoint::new(p.vertex.clone(), f.clone()),
                None => Ok(EvaluationPoint::identity(p.vertex.clone())),
            })
            .collect()
    }
}

/// Lattice points of `kP`, in lexicographic order.
pub fn sections(t: &ToricDivisorData, k: u32, limits: EnumerationLimits) -> Result<Vec<Vec<i64>>> {
    lattice_points(t, k, &[], limits)
}

/// Lattice points `u` of `kP` that additionally satisfy `c . u >= bound(k)`
/// for each extra row `(c, bound)`.
pub(crate) fn lattice_points(
    t: &ToricDivisorData,
    k: u32,
    lower_bounds: &[(Vec<i64>, i64)],
    limits: EnumerationLimits,
) -> Result<Vec<Vec<i64>>> {
    let n = t.dim();
    let k = i64::from(k);
    let verts: Vec<Vec<i64>> = t.polytope.vertices().iter().map(|v| v.to_i64().expect("lattice")).collect();
    let lo: Vec<i64> = (0..n).map(|i| verts.iter().map(|v| v[i]).min().unwrap() * k).collect();
    let hi: Vec<i64> = (0..n).map(|i| verts.iter().map(|v| v[i]).max().unwrap() * k).collect();

    let inside = |u: &[i64]| {
        t.lattice_facets.iter().all(|(a, b)| dot_i(a, u) <= b * k)
            && lower_bounds.iter().all(|(c, bound)| dot_i(c, u) >= *bound)
    };

    let mut out = Vec::new();
    let mut u = lo.clone();
    loop {
        if inside(&u) {
            if out.len() == limits.cap {
                return Err(Error::CapExceeded { level: k as u32, cap: limits.cap });
            }
            out.push(u.clone());
        }
        // Odometer over the bounding box, last coordinate fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if u[i] < hi[i] {
                u[i] += 1;
                break;
            }
            u[i] = lo[i];
        }
    }
}

pub(crate) fn dot_i(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
