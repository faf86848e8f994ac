//! Intersection arithmetic on `S = E x E` and on a double cover `f: Y -> S`
//! branched along a smooth curve in `|2R|`, `R = F_1 + F_2`.
//!
//! Classes are integer combinations `a F_1 + b F_2 + c Δ` of the two fibre
//! classes and the diagonal. The family `A_ℓ = ℓF_1 + (ℓ²-ℓ+1)F_2 - (ℓ-1)Δ`
//! has `A_ℓ² = 2` for every `ℓ` while `A_ℓ . H` grows, so the multiple
//! needed to dominate `K_Y = f^*R` grows without bound.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::jetsep::{
    certify_canonical_free, inverted_simplex, Assumption, BodyBasis, Certificate, FramedBody, MultiplierEvidence,
    PointBodies,
};
use crate::ratgeom::{format_rational, frac, int, Rational};
use crate::{Error, Result};

/// `a F_1 + b F_2 + c Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl SurfaceClass {
    pub const F1: Self = Self::new(1, 0, 0);
    pub const F2: Self = Self::new(0, 1, 0);
    pub const DIAGONAL: Self = Self::new(0, 0, 1);
    /// The polarization `F_1 + F_2` fixing the ample component.
    pub const H: Self = Self::new(1, 1, 0);

    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn scale(self, k: i64) -> Self {
        Self::new(k * self.a, k * self.b, k * self.c)
    }

    pub fn minus(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

/// `F_i² = Δ² = 0`, all mixed products `1`.
pub fn intersect(x: SurfaceClass, y: SurfaceClass) -> i64 {
    x.a * y.b + y.a * x.b + x.a * y.c + y.a * x.c + x.b * y.c + y.b * x.c
}

pub fn a_ell(ell: i64) -> Result<SurfaceClass> {
    if ell < 2 {
        return Err(Error::InvalidEll(ell));
    }
    Ok(SurfaceClass::new(ell, ell * ell - ell + 1, -(ell - 1)))
}

/// Positive-cone membership on the component containing `H`.
pub fn is_ample_abelian(x: SurfaceClass) -> bool {
    intersect(x, x) > 0 && intersect(x, SurfaceClass::H) > 0
}

/// `f^*(base)` on the double cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverClass {
    pub base: SurfaceClass,
}

/// `(f^*x . f^*y) = 2 (x . y)`.
pub fn pullback_intersect(x: CoverClass, y: CoverClass) -> i64 {
    2 * intersect(x.base, y.base)
}

/// The branch half-class `R = F_1 + F_2`.
pub const BRANCH_HALF: SurfaceClass = SurfaceClass::H;

/// `K_Y = f^*(K_S + R) = f^*R`.
pub fn canonical_y() -> CoverClass {
    CoverClass { base: BRANCH_HALF }
}

/// `A_ℓ . R`.
pub fn n_ell(ell: i64) -> Result<i64> {
    Ok(intersect(a_ell(ell)?, BRANCH_HALF))
}

/// Least `q >= 1` with `q A_ℓ - R` ample, by upward search. Ampleness on
/// `Y` of `q D_ℓ - K_Y = f^*(q A_ℓ - R)` is that of `q A_ℓ - R` on `S`.
pub fn m_of_d(ell: i64) -> Result<i64> {
    let a = a_ell(ell)?;
    Ok((1..).find(|&q| is_ample_abelian(a.scale(q).minus(BRANCH_HALF))).expect("A_ell is ample"))
}

/// Rational bracket around the larger root of `x² - N x + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdBracket {
    pub n: i64,
    pub lo: Rational,
    pub hi: Rational,
}

impl ThresholdBracket {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// `N - 1 < lo` and `hi < N`.
    pub fn strictly_inside(&self) -> bool {
        self.lo > int(self.n - 1) && self.hi < int(self.n)
    }

    /// `ceil` of the root, when the bracket pins it to one integer interval.
    pub fn ceiling(&self) -> Option<i64> {
        use num::ToPrimitive;
        let (lo, hi) = (self.lo.ceil(), self.hi.ceil());
        (lo == hi && !self.hi.is_integer()).then(|| lo.to_integer().to_i64().expect("small"))
    }
}

/// Brackets `(N + sqrt(N² - 4)) / 2` to width at most `10⁻⁶` by bisection on
/// `x² - N x + 1`, which is negative below the root and positive above it
/// on `[N - 1, N]`.
pub fn threshold_real(ell: i64) -> Result<ThresholdBracket> {
    let n = n_ell(ell)?;
    let p = |x: &Rational| x * x - int(n) * x + int(1);
    let (mut lo, mut hi) = (int(n - 1), int(n));
    debug_assert!(p(&lo).is_negative() && p(&hi).is_positive());
    let tol = frac(1, 1_000_000);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / int(2);
        let v = p(&mid);
        if v.is_zero() {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if v.is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdBracket { n, lo, hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeshadriData {
    /// `A_ℓ . F_2`, from the translate of `F_2` through the point.
    pub upper: i64,
    /// Cited lower bound for ample integral classes on abelian varieties.
    pub lower: i64,
    pub epsilon: i64,
}

/// Lower bound on Seshadri constants of ample line bundles on abelian
/// varieties; cited, not derived.
pub const ABELIAN_SESHADRI_LOWER: i64 = 1;

pub fn seshadri_data(ell: i64) -> Result<SeshadriData> {
    let upper = intersect(a_ell(ell)?, SurfaceClass::F2);
    let lower = ABELIAN_SESHADRI_LOWER;
    if upper < lower {
        return Err(Error::InconsistentSeshadri { upper, lower });
    }
    let epsilon = if upper == lower { upper } else { lower };
    Ok(SeshadriData { upper, lower, epsilon })
}

/// `s + m(D_ℓ)`, the multiple of `D_ℓ` in the conclusion.
pub fn final_coefficient(ell: i64, s: i64) -> Result<i64> {
    Ok(s + m_of_d(ell)?)
}

pub const DEFAULT_S: i64 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub ell: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub a_squared: i64,
    pub a_dot_h: i64,
    pub n_ell: i64,
    pub m_of_d: i64,
    pub coefficient: i64,
}

pub fn table_row(ell: i64, s: i64) -> Result<TableRow> {
    let a = a_ell(ell)?;
    Ok(TableRow {
        ell,
        a: a.a,
        b: a.b,
        c: a.c,
        a_squared: intersect(a, a),
        a_dot_h: intersect(a, SurfaceClass::H),
        n_ell: n_ell(ell)?,
        m_of_d: m_of_d(ell)?,
        coefficient: final_coefficient(ell, s)?,
    })
}

pub fn table(ells: impl IntoIterator<Item = i64>, s: i64) -> Result<Vec<TableRow>> {
    ells.into_iter().map(|l| table_row(l, s)).collect()
}

pub const TABLE_HEADER: &str = "ell,a,b,c,a_squared,a_dot_h,n_ell,m_of_d,coefficient";

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.ell, r.a, r.b, r.c, r.a_squared, r.a_dot_h, r.n_ell, r.m_of_d, r.coefficient
        ));
    }
    out
}

const SESHADRI_ROUTE: &str = "seshadri-route";
const ABELIAN_LOWER: &str = "abelian-seshadri-lower-bound";
const SESHADRI_TRANSFER: &str = "seshadri-pullback";

/// Certificate that `(s + m(D_ℓ)) D_ℓ` separates 1-jets on `Y`.
///
/// The body at a general point `y` is not computed: `Δ⁻¹_s` is recorded as
/// a cited inner bound of every infinitesimal body of `s D_ℓ`, from
/// `ε(D_ℓ; y) >= 1`. The criterion is then checked on it like any other.
pub fn surface_certificate(ell: i64, s: i64) -> Result<Certificate> {
    if s < 1 {
        return Err(Error::InvalidInput(format!("s must be a positive integer, got {s}")));
    }
    let sesh = seshadri_data(ell)?;
    let a = a_ell(ell)?;
    let md = m_of_d(ell)?;
    let n = n_ell(ell)?;
    let xi = int(s * sesh.epsilon);
    let bodies = PointBodies {
        point: "y".into(),
        bodies: vec![FramedBody {
            flag: "every infinitesimal flag".into(),
            polytope: inverted_simplex(&xi, 2)?,
            basis: BodyBasis::Cited { assumption: SESHADRI_ROUTE.into() },
        }],
    };
    let evidence = MultiplierEvidence {
        value: md,
        evidence: format!(
            "q D - K_Y = f^*(q A - R) is ample iff q A - R is; with A^2 = {}, A.R = N = {n}: \
             (qA - R)^2 = 2q^2 - 2Nq + 2 > 0 and (qA - R).H = {}q - 2 > 0; least such q is {md}",
            intersect(a, a),
            intersect(a, SurfaceClass::H),
        ),
    };
    let assumptions = vec![
        Assumption::new(
            ABELIAN_LOWER,
            &format!("every ample integral line bundle on an abelian variety has Seshadri constant >= {}", sesh.lower),
            Some("Lazarsfeld, Positivity in Algebraic Geometry I, Example 5.3.10"),
        ),
        Assumption::new(
            SESHADRI_TRANSFER,
            &format!("e(D; y) >= e(A; f(y)) = {} for the finite pullback D = f^*A", sesh.epsilon),
            None,
        ),
        Assumption::new(
            SESHADRI_ROUTE,
            &format!(
                "on a surface, e(D; y) >= 1 gives the inverted simplex of size {} inside every infinitesimal body of {s} D at y",
                format_rational(&xi)
            ),
            Some("Kuronya-Lozovanu, infinitesimal Newton-Okounkov bodies and jet separation"),
        ),
    ];
    certify_canonical_free(&[bodies], s, Some(evidence), 2, 1, &format!("D_{ell}"), assumptions)
}
