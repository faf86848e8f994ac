//! Inverted simplices and the jet-separation certificates built on them.
//!
//! The criteria all have the shape "every body at every marked point
//! contains `Δ⁻¹_{n+k+ε}` for some `ε > 0`". With `ξ_max(P)` the largest size
//! of an inverted simplex inside `P`, that reads `ξ_max > n + k` with strict
//! inequality, so `ε` never appears as an input.

mod certificate;

use std::cmp::Ordering;
use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ratgeom::{format_rational, int, parse_rational, Polytope, Rational, RationalVector};
use crate::{Error, Result};

pub use certificate::{
    certify_adjoint, certify_canonical_free, certify_jet_ample, cyclic_cover_rule, frame_label,
    infinitesimal_point_bodies, multipoint_point_bodies, verify, vertex_label, Assumption, BodyBasis, BodyRecord,
    Certificate, Conclusion, CoverVerdict, FramedBody, Inputs, Intermediate, MultiplierEvidence, PointBodies,
    Theorem, Verification, ALL_POINTS,
};

/// `conv{0, ξe_1, ξ(e_1+e_2), ..., ξ(e_1+...+e_n)}`.
pub fn inverted_simplex(xi: &Rational, n: usize) -> Result<Polytope> {
    if xi.is_negative() {
        return Err(Error::NegativeSize(format_rational(xi)));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    Polytope::hull(n, (0..=n).map(|i| partial_sum(n, i).scale(xi)))
}

/// `e_1 + ... + e_i`.
fn partial_sum(n: usize, i: usize) -> RationalVector {
    RationalVector::new((0..n).map(|j| if j < i { int(1) } else { int(0) }).collect())
}

/// `sup{ξ >= 0 : Δ⁻¹_ξ ⊆ P}`, which may be unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XiMax {
    Finite(Rational),
    Infinite,
}

impl XiMax {
    /// `ξ_max > bound`.
    pub fn exceeds(&self, bound: &Rational) -> bool {
        match self {
            XiMax::Finite(x) => x > bound,
            XiMax::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            XiMax::Finite(x) => Some(x),
            XiMax::Infinite => None,
        }
    }
}

impl fmt::Display for XiMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XiMax::Finite(x) => f.write_str(&format_rational(x)),
            XiMax::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for XiMax {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            Ok(XiMax::Infinite)
        } else {
            parse_rational(s).map(XiMax::Finite)
        }
    }
}

impl Serialize for XiMax {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for XiMax {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact `0 ∈ P`, boundary included.
pub fn origin_membership(p: &Polytope) -> bool {
    p.contains_point(&RationalVector::zeros(p.dim()))
}

/// Largest `ξ` with `Δ⁻¹_ξ ⊆ P`.
///
/// Since `0 ∈ P`, the simplex fits iff each vertex `ξ(e_1+...+e_i)` does. A
/// facet `a.x <= b` caps `ξ` at `b / max_i a.(e_1+...+e_i)` when that max is
/// positive; an equation not vanishing on some partial sum forces `ξ = 0`.
pub fn xi_max(p: &Polytope) -> Result<XiMax> {
    if !origin_membership(p) {
        return Err(Error::OriginNotContained);
    }
    let n = p.dim();
    let dirs: Vec<RationalVector> = (1..=n).map(|i| partial_sum(n, i)).collect();
    if p.equations().iter().any(|h| dirs.iter().any(|d| !h.normal.dot(d).is_zero())) {
        return Ok(XiMax::Finite(int(0)));
    }
    let mut best = XiMax::Infinite;
    for h in p.facets() {
        let c = dirs.iter().map(|d| h.normal.dot(d)).max().expect("n >= 1");
        if c.is_positive() {
            let cand = XiMax::Finite(&h.offset / &c);
            if cand.cmp(&best) == Ordering::Less {
                best = cand;
            }
        }
    }
    Ok(best)
}
