//! Exact convex hulls for small point sets.
//!
//! The point set is first reduced to its affine hull: the equations come from
//! the null space of the difference vectors, and the points are projected onto
//! the pivot coordinates of that space (an injective coordinate projection).
//! The full-dimensional hull in the projected space is then computed by
//! interval bounds (1-D), Andrew's monotone chain (2-D), or incremental
//! facet enumeration over `r`-subsets (3-D and up), and lifted back.

use std::collections::BTreeSet;

use itertools::Itertools;
use num::{Signed, Zero};

use super::linalg::{null_space, primitive, rank, rref};
use super::{dot, Rational, RationalVector};

/// `(normal, offset)` meaning `<normal, x> <= offset` (or `=` for equations).
pub(crate) type Constraint = (Vec<Rational>, Rational);

pub(crate) struct HullParts {
    pub vertices: Vec<RationalVector>,
    pub facets: Vec<Constraint>,
    pub equations: Vec<Constraint>,
}

pub(crate) fn convex_hull(dim: usize, mut points: Vec<RationalVector>) -> HullParts {
    points.sort();
    points.dedup();
    if points.is_empty() {
        return HullParts { vertices: vec![], facets: vec![], equations: vec![] };
    }

    let base = points[0].clone();
    let directions: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.sub(&base).into_coords()).collect();
    let (_, pivots) = rref(&directions, dim);

    let mut equations: Vec<Constraint> = null_space(&directions, dim)
        .into_iter()
        .map(|a| {
            let (mut a, _) = primitive(&a);
            if a.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                a.iter_mut().for_each(|x| *x = -x.clone());
            }
            let b = dot(&a, base.coords());
            (a, b)
        })
        .collect();
    equations.sort();

    let projected: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| pivots.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let (vertex_idx, local_facets) = full_dim_hull(&projected, pivots.len());

    let mut facets: Vec<Constraint> = local_facets
        .into_iter()
        .map(|(a_local, b)| {
            let mut a = vec![Rational::zero(); dim];
            for (i, &c) in pivots.iter().enumerate() {
                a[c] = a_local[i].clone();
            }
            normalize(a, b)
        })
        .collect();
    facets.sort();
    facets.dedup();

    let mut vertices: Vec<RationalVector> = vertex_idx.into_iter().map(|i| points[i].clone()).collect();
    vertices.sort();
    HullParts { vertices, facets, equations }
}

fn normalize(a: Vec<Rational>, b: Rational) -> Constraint {
    let (a, s) = primitive(&a);
    (a, b * s)
}

/// Hull of a full-dimensional point set in `Q^r`. Returns vertex indices and
/// facets.
fn full_dim_hull(points: &[Vec<Rational>], r: usize) -> (Vec<usize>, Vec<Constraint>) {
    match r {
        0 => (vec![0], vec![]),
        1 => {
            let lo = (0..points.len()).min_by(|&i, &j| points[i][0].cmp(&points[j][0])).unwrap();
            let hi = (0..points.len()).max_by(|&i, &j| points[i][0].cmp(&points[j][0])).unwrap();
            let facets = vec![
                (vec![Rational::from_integer(1.into())], points[hi][0].clone()),
                (vec![Rational::from_integer((-1).into())], -points[lo][0].clone()),
            ];
            (vec![lo, hi], facets)
        }
        2 => monotone_chain(points),
        _ => incremental(points, r),
    }
}

fn cross(o: &[Rational], a: &[Rational], b: &[Rational]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

fn monotone_chain(points: &[Vec<Rational>]) -> (Vec<usize>, Vec<Constraint>) {
    let mut sorted: Vec<usize> = (0..points.len()).collect();
    sorted.sort_by(|&i, &j| points[i].cmp(&points[j]));
    let mut lower: Vec<usize> = Vec::new();
    for &i in &sorted {
        while lower.len() >= 2
            && !cross(&points[lower[lower.len() - 2]], &points[lower[lower.len() - 1]], &points[i]).is_positive()
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in sorted.iter().rev() {
        while upper.len() >= 2
            && !cross(&points[upper[upper.len() - 2]], &points[upper[upper.len() - 1]], &points[i]).is_positive()
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    let ring: Vec<usize> = lower.into_iter().chain(upper).collect();

    let facets = (0..ring.len())
        .map(|i| {
            let p = &points[ring[i]];
            let q = &points[ring[(i + 1) % ring.len()]];
            // Counter-clockwise ring: the interior is on the left.
            let a = vec![&q[1] - &p[1], &p[0] - &q[0]];
            let b = dot(&a, p);
            (a, b)
        })
        .collect();
    (ring, facets)
}

fn incremental(points: &[Vec<Rational>], r: usize) -> (Vec<usize>, Vec<Constraint>) {
    let n = points.len();
    let centroid: Vec<Rational> = (0..r)
        .map(|c| points.iter().map(|p| p[c].clone()).sum::<Rational>() / Rational::from_integer(n.into()))
        .collect();
    let sq_dist = |p: &[Rational]| -> Rational {
        p.iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum()
    };
    let mut order: Vec<usize> = (0..n).collect();
    let dists: Vec<Rational> = points.iter().map(|p| sq_dist(p)).collect();
    order.sort_by(|&i, &j| dists[j].cmp(&dists[i]).then(i.cmp(&j)));

    // Seed with an affinely independent simplex, farthest points first.
    let mut current: Vec<usize> = vec![order[0]];
    for &i in &order[1..] {
        if current.len() == r + 1 {
            break;
        }
        let mut rows: Vec<Vec<Rational>> = current[1..]
            .iter()
            .map(|&j| diff(&points[j], &points[current[0]]))
            .collect();
        rows.push(diff(&points[i], &points[current[0]]));
        if rank(&rows, r) == rows.len() {
            current.push(i);
        }
    }

    let mut facets = enumerate_facets(points, &current, r);
    for &i in &order {
        if current.contains(&i) || satisfies(&facets, &points[i]) {
            continue;
        }
        current.push(i);
        facets = enumerate_facets(points, &current, r);
        current.retain(|&j| is_vertex(&facets, &points[j], r));
    }
    current.retain(|&j| is_vertex(&facets, &points[j], r));
    (current, facets)
}

fn diff(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn satisfies(facets: &[Constraint], p: &[Rational]) -> bool {
    facets.iter().all(|(a, b)| dot(a, p) <= *b)
}

fn is_vertex(facets: &[Constraint], p: &[Rational], r: usize) -> bool {
    let tight: Vec<Vec<Rational>> =
        facets.iter().filter(|(a, b)| dot(a, p) == *b).map(|(a, _)| a.clone()).collect();
    rank(&tight, r) == r
}

/// All facets of the hull of `points[subset]`, by brute force over `r`-subsets.
fn enumerate_facets(points: &[Vec<Rational>], subset: &[usize], r: usize) -> Vec<Constraint> {
    let mut found: BTreeSet<Constraint> = BTreeSet::new();
    for combo in subset.iter().copied().combinations(r) {
        let rows: Vec<Vec<Rational>> = combo[1..].iter().map(|&j| diff(&points[j], &points[combo[0]])).collect();
        let ns = null_space(&rows, r);
        if ns.len() != 1 {
            continue;
        }
        let a = &ns[0];
        let b = dot(a, &points[combo[0]]);
        let (mut above, mut below) = (false, false);
        for &j in subset {
            let v = dot(a, &points[j]);
            if v > b {
                above = true;
            } else if v < b {
                below = true;
            }
            if above && below {
                break;
            }
        }
        match (above, below) {
            (false, _) => {
                found.insert(normalize(a.clone(), b));
            }
            (true, false) => {
                found.insert(normalize(a.iter().map(|x| -x).collect(), -b));
            }
            (true, true) => {}
        }
    }
    found.into_iter().collect()
}
