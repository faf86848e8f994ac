//! JSON forms of rationals and polytopes.
//!
//! Rationals are written as `"p/q"` (or `"p"` when integral). On input a bare
//! JSON integer is accepted as well.

use serde::{Deserialize, Serialize};

use super::{Polytope, Rational, RationalVector};
use crate::{Error, Result};

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|_| Error::InvalidRational(s.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Int(i64),
    Str(String),
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalRepr::Int(n) => Ok(super::int(*n)),
            RationalRepr::Str(s) => parse_rational(s),
        }
    }
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr::Str(format_rational(r))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetJson {
    pub normal: Vec<RationalRepr>,
    pub offset: RationalRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub vertices: Vec<Vec<RationalRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<FacetJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<Vec<FacetJson>>,
}

fn vector_json(v: &RationalVector) -> Vec<RationalRepr> {
    v.coords().iter().map(RationalRepr::from).collect()
}

fn parse_vector(v: &[RationalRepr]) -> Result<RationalVector> {
    Ok(RationalVector::new(v.iter().map(RationalRepr::to_rational).collect::<Result<_>>()?))
}

impl Polytope {
    pub fn to_json(&self) -> PolytopeJson {
        let facet = |h: &super::Halfspace| FacetJson {
            normal: vector_json(&h.normal),
            offset: RationalRepr::from(&h.offset),
        };
        PolytopeJson {
            dim: self.dim(),
            vertices: self.vertices().iter().map(vector_json).collect(),
            facets: Some(self.facets().iter().map(facet).collect()),
            equations: Some(self.equations().iter().map(facet).collect()),
        }
    }

    /// Rebuilds the polytope from its vertices; any stored H-representation
    /// is ignored and recomputed.
    pub fn from_json(json: &PolytopeJson) -> Result<Polytope> {
        let vertices = json.vertices.iter().map(|v| parse_vector(v)).collect::<Result<Vec<_>>>()?;
        Polytope::hull(json.dim, vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::{frac, int};

    #[test]
    fn rationals_parse_and_print() {
        assert_eq!(parse_rational("3/4").unwrap(), frac(3, 4));
        assert_eq!(parse_rational(" -6/8").unwrap(), frac(-3, 4));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&frac(6, 4)), "3/2");
        assert_eq!(format_rational(&int(-2)), "-2");
    }

    #[test]
    fn polytope_json_accepts_mixed_literals() {
        let src = r#"{"dim": 2, "vertices": [[0, "0"], ["3/2", 0], [0, 1]]}"#;
        let json: PolytopeJson = serde_json::from_str(src).unwrap();
        let p = Polytope::from_json(&json).unwrap();
        assert_eq!(p.vertices().len(), 3);
        let out = serde_json::to_string(&p.to_json()).unwrap();
        assert!(out.contains("\"3/2\""));
        assert!(out.contains("\"facets\""));
        let back = Polytope::from_json(&serde_json::from_str(&out).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
