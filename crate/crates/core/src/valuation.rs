//! Flag valuations of monomial sections.
//!
//! A section is a formal sum of monomials `x^w` in local coordinates at a
//! point; coefficients are only nonzero markers, so no cancellation between
//! terms is modelled. Two valuations are provided:
//!
//! - the admissible-flag valuation, which for invariant flags is the
//!   lexicographically smallest exponent;
//! - the infinitesimal valuation: the lowest total degree first, then the
//!   remaining coordinates of the lex-minimal exponent of that degree.
//!
//! The two are related by the unimodular map
//! `(v_1, ..., v_n) -> (v_1 + ... + v_n, v_2, ..., v_n)`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ratgeom::{int, Polytope, Rational, RationalVector};
use crate::{Error, Result};

/// How exponent tuples are compared when picking the minimal monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LexOrder {
    /// Ascending lex reading `(w_1, ..., w_n)` left to right.
    #[default]
    LeftToRight,
    /// Ascending lex reading `(w_n, ..., w_1)`.
    RightToLeft,
}

impl LexOrder {
    pub fn cmp(self, a: &[i64], b: &[i64]) -> Ordering {
        match self {
            LexOrder::LeftToRight => a.cmp(b),
            LexOrder::RightToLeft => a.iter().rev().cmp(b.iter().rev()),
        }
    }
}

/// A nonempty formal sum of distinct monomials with nonnegative exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SectionJson", into = "SectionJson")]
pub struct MonomialSection {
    terms: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct SectionJson {
    terms: Vec<Vec<i64>>,
}

impl TryFrom<SectionJson> for MonomialSection {
    type Error = Error;

    fn try_from(json: SectionJson) -> Result<Self> {
        MonomialSection::new(json.terms)
    }
}

impl From<MonomialSection> for SectionJson {
    fn from(s: MonomialSection) -> Self {
        SectionJson { terms: s.terms }
    }
}

impl MonomialSection {
    pub fn new(terms: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::EmptySection);
        };
        let n = first.len();
        if let Some(t) = terms.iter().find(|t| t.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: t.len() });
        }
        if terms.iter().flatten().any(|&e| e < 0) {
            return Err(Error::InvalidInput("monomial exponents must be nonnegative".into()));
        }
        let distinct: BTreeSet<&Vec<i64>> = terms.iter().collect();
        if distinct.len() != terms.len() {
            return Err(Error::InvalidInput("monomial exponents must be pairwise distinct".into()));
        }
        Ok(Self { terms })
    }

    pub fn monomial(w: Vec<i64>) -> Result<Self> {
        Self::new(vec![w])
    }

    pub fn terms(&self) -> &[Vec<i64>] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].len()
    }

    /// `s * x^u`.
    pub fn times_monomial(&self, u: &[i64]) -> Result<Self> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        Self::new(self.terms.iter().map(|w| w.iter().zip(u).map(|(a, b)| a + b).collect()).collect())
    }
}

/// A value `nu(s)` in `Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValuationVector(pub Vec<i64>);

impl ValuationVector {
    pub fn to_rational(&self) -> RationalVector {
        RationalVector::from_ints(&self.0)
    }
}

/// Valuation for an invariant admissible flag: the lex-minimal exponent.
pub fn flag_valuation(s: &MonomialSection, order: LexOrder) -> ValuationVector {
    let w = s.terms.iter().min_by(|a, b| order.cmp(a, b)).expect("sections are nonempty");
    ValuationVector(w.clone())
}

/// Infinitesimal valuation with the default lex convention.
pub fn infinitesimal_valuation(s: &MonomialSection) -> ValuationVector {
    infinitesimal_valuation_with(s, LexOrder::default())
}

pub fn infinitesimal_valuation_with(s: &MonomialSection, order: LexOrder) -> ValuationVector {
    let degree = |w: &Vec<i64>| w.iter().sum::<i64>();
    let lowest = s.terms.iter().map(degree).min().expect("sections are nonempty");
    let w = s
        .terms
        .iter()
        .filter(|w| degree(w) == lowest)
        .min_by(|a, b| order.cmp(a, b))
        .expect("the minimum is attained");
    let mut v = w.clone();
    v[0] = lowest;
    ValuationVector(v)
}

/// `(v_1, ..., v_n) -> (v_1 + ... + v_n, v_2, ..., v_n)`.
pub fn jet_to_infinitesimal(v: &ValuationVector) -> ValuationVector {
    let mut out = v.0.clone();
    if let Some(first) = out.first_mut() {
        *first = v.0.iter().sum();
    }
    ValuationVector(out)
}

/// Matrix of [`jet_to_infinitesimal`]: all-ones first row, identity below.
pub fn jet_to_infinitesimal_matrix(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == 0 || i == j { int(1) } else { int(0) }).collect())
        .collect()
}

/// Image of a body under the jet-to-infinitesimal map.
pub fn transform_body(p: &Polytope) -> Polytope {
    let n = p.dim();
    p.map_affine(&jet_to_infinitesimal_matrix(n), &RationalVector::zeros(n))
        .expect("square map of matching dimension")
}
