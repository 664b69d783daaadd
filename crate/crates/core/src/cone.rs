//! Rational polyhedral cones generated by nonnegative integer vectors.
//!
//! Facets come from a double-description pass over the dual cone, carried
//! out in coordinates of the linear span so that lower-dimensional cones are
//! handled uniformly. Point membership is decided separately by
//! Fourier–Motzkin elimination on the Farkas alternative.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::{clear_denominators, int_rat, rank, rref, sort_graded, IntVec, Rat};
use crate::error::{check_dim, Error, Result};

/// Largest ambient dimension accepted by [`ConeFacets::of`].
pub const MAX_FACET_DIM: usize = 4;

/// Inward facet normals of a pointed cone.
///
/// Each normal is a primitive integer vector lying in the linear span of the
/// cone, and the cone is `{x ∈ span : v·x ≥ 0 for every normal v}`. A
/// one-dimensional cone has a single normal pointing along the ray.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeFacets {
    dim: usize,
    rank: usize,
    normals: Vec<IntVec>,
}

impl ConeFacets {
    /// Facets of `cone(generators)`. Generators must lie in ℕⁿ.
    pub fn of(dim: usize, generators: &[IntVec]) -> Result<Self> {
        if dim > MAX_FACET_DIM {
            return Err(Error::unsupported(format!(
                "facet enumeration is limited to dimension {MAX_FACET_DIM}, got {dim}"
            )));
        }
        Self::of_unchecked(dim, generators)
    }

    pub(crate) fn of_unchecked(dim: usize, generators: &[IntVec]) -> Result<Self> {
        for g in generators {
            check_dim(dim, g.dim())?;
            if !g.is_nonnegative() {
                return Err(Error::input(format!("cone generator {g} has a negative entry")));
            }
        }
        let gens: Vec<IntVec> = generators.iter().filter(|g| !g.is_zero()).cloned().collect();
        if gens.is_empty() {
            return Ok(ConeFacets { dim, rank: 0, normals: Vec::new() });
        }
        let span = SpanCoords::new(&gens);
        let projected: Vec<IntVec> = gens.iter().map(|g| span.project(g)).collect();
        let rays = dual_rays(&projected, span.rank());
        let mut normals: Vec<IntVec> = rays.iter().map(|u| span.lift(u)).collect();
        sort_graded(&mut normals);
        Ok(ConeFacets { dim, rank: span.rank(), normals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the cone (rank of its span).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn normals(&self) -> &[IntVec] {
        &self.normals
    }

    /// Whether `x`, assumed to lie in the span, satisfies every facet
    /// inequality.
    pub fn satisfies(&self, x: &IntVec) -> bool {
        self.normals.iter().all(|v| !v.dot(x).is_negative())
    }

    /// Whether a nonzero point of the cone spans one of its extremal rays.
    pub fn on_extremal_ray(&self, x: &IntVec) -> bool {
        if x.is_zero() || self.rank == 0 {
            return false;
        }
        let tight: Vec<IntVec> = self.normals.iter().filter(|v| v.dot(x).is_zero()).cloned().collect();
        rank(&tight) + 1 == self.rank
    }
}

/// Coordinates on the linear span of a set of vectors.
///
/// The span is projected onto the pivot coordinates of its reduced row
/// echelon basis; that projection is injective on the span.
struct SpanCoords {
    pivots: Vec<usize>,
    basis: Vec<Vec<Rat>>,
}

impl SpanCoords {
    fn new(vectors: &[IntVec]) -> Self {
        let mut m: Vec<Vec<Rat>> = vectors.iter().map(|v| v.to_rat().entries().to_vec()).collect();
        let pivots = rref(&mut m);
        m.truncate(pivots.len());
        SpanCoords { pivots, basis: m }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn project(&self, v: &IntVec) -> IntVec {
        IntVec::new(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    /// The vector in the span that induces the same functional on the span
    /// as `u` does on projected coordinates.
    fn lift(&self, u: &IntVec) -> IntVec {
        let r = self.rank();
        // basis row k projects to e_k, so the functional takes value u_k on it;
        // solve Gram · c = u
        let mut gram: Vec<Vec<Rat>> = (0..r)
            .map(|i| {
                let mut row: Vec<Rat> = (0..r).map(|j| dot_rat(&self.basis[i], &self.basis[j])).collect();
                row.push(int_rat(&u[i]));
                row
            })
            .collect();
        rref(&mut gram);
        let n = self.basis.first().map_or(0, Vec::len);
        let mut v = vec![Rat::zero(); n];
        for (k, row) in gram.iter().enumerate() {
            let c = &row[r];
            for (x, b) in v.iter_mut().zip(&self.basis[k]) {
                *x += c * b;
            }
        }
        clear_denominators(&v)
    }
}

fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extreme rays of `{u : u·g ≥ 0 for all g}` for a full-dimensional pointed
/// cone in ℚʳ generated by `gens`.
fn dual_rays(gens: &[IntVec], r: usize) -> Vec<IntVec> {
    // initial simplex from the first r independent generators
    let mut chosen: Vec<usize> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let mut trial: Vec<IntVec> = chosen.iter().map(|&j| gens[j].clone()).collect();
        trial.push(g.clone());
        if rank(&trial) == trial.len() {
            chosen.push(i);
            if chosen.len() == r {
                break;
            }
        }
    }
    debug_assert_eq!(chosen.len(), r);

    // rays of the simplicial dual are the columns of the inverse matrix
    let mut m: Vec<Vec<Rat>> = chosen
        .iter()
        .enumerate()
        .map(|(row, &i)| {
            let mut v: Vec<Rat> = gens[i].entries().iter().map(int_rat).collect();
            v.extend((0..r).map(|k| if k == row { Rat::from_integer(1.into()) } else { Rat::zero() }));
            v
        })
        .collect();
    rref(&mut m);
    let mut rays: Vec<IntVec> = (0..r)
        .map(|col| {
            let column: Vec<Rat> = (0..r).map(|row| m[row][r + col].clone()).collect();
            clear_denominators(&column)
        })
        .collect();

    let mut processed: Vec<IntVec> = chosen.iter().map(|&i| gens[i].clone()).collect();
    for (i, g) in gens.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|u| u.dot(g)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            processed.push(g.clone());
            continue;
        }
        let mut next: Vec<IntVec> = Vec::new();
        for (u, val) in rays.iter().zip(&values) {
            if !val.is_negative() {
                next.push(u.clone());
            }
        }
        for (p, vp) in rays.iter().zip(&values) {
            if !vp.is_positive() {
                continue;
            }
            for (q, vq) in rays.iter().zip(&values) {
                if !vq.is_negative() || !adjacent(p, q, &processed, r) {
                    continue;
                }
                let combo = &p.scale(&-vq) + &q.scale(vp);
                next.push(combo.primitive());
            }
        }
        next.sort();
        next.dedup();
        rays = next;
        processed.push(g.clone());
    }
    rays
}

fn adjacent(p: &IntVec, q: &IntVec, constraints: &[IntVec], r: usize) -> bool {
    let tight: Vec<IntVec> = constraints.iter().filter(|g| p.dot(g).is_zero() && q.dot(g).is_zero()).cloned().collect();
    r >= 2 && rank(&tight) == r - 2
}

/// Exact test for `x ∈ cone(generators)` (the cone of the empty set is {0}).
///
/// Uses the Farkas alternative: `x` lies outside the cone iff some `y`
/// satisfies `y·g ≥ 0` for every generator and `y·x ≤ −1`. Feasibility of that
/// system is decided by Fourier–Motzkin elimination.
pub fn in_cone(x: &IntVec, generators: &[IntVec]) -> Result<bool> {
    for g in generators {
        check_dim(x.dim(), g.dim())?;
    }
    if x.is_zero() {
        return Ok(true);
    }
    let mut system: Vec<Inequality> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| Inequality::new(g.to_rat().entries().to_vec(), Rat::zero()))
        .collect();
    system.push(Inequality::new((-x).to_rat().entries().to_vec(), Rat::from_integer(1.into())));
    Ok(!fourier_motzkin_feasible(system, x.dim()))
}

/// `coeffs · y ≥ rhs`.
#[derive(Clone, Debug)]
struct Inequality {
    coeffs: Vec<Rat>,
    rhs: Rat,
}

impl Inequality {
    fn new(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Inequality { coeffs, rhs }
    }

    /// Rescales by a positive factor so the coefficients form a primitive
    /// integer vector. Returns `None` for a trivial row.
    fn normalized(self) -> Option<(IntVec, Rat)> {
        if self.coeffs.iter().all(Zero::is_zero) {
            return None;
        }
        let ints = clear_denominators(&self.coeffs);
        let (k, orig) = self
            .coeffs
            .iter()
            .zip(ints.entries())
            .find(|(c, _)| !c.is_zero())
            .map(|(c, i)| (int_rat(i), c.clone()))
            .expect("nonzero row");
        let factor = k / orig;
        Some((ints, self.rhs * factor))
    }
}

fn fourier_motzkin_feasible(mut system: Vec<Inequality>, vars: usize) -> bool {
    for k in 0..vars {
        system = match tidy(system) {
            Some(s) => s,
            None => return false,
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for row in system {
            if row.coeffs[k].is_positive() {
                pos.push(row);
            } else if row.coeffs[k].is_negative() {
                neg.push(row);
            } else {
                rest.push(row);
            }
        }
        for p in &pos {
            for q in &neg {
                let a = p.coeffs[k].clone();
                let b = -q.coeffs[k].clone();
                let coeffs: Vec<Rat> = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x * &b + y * &a).collect();
                let rhs = &p.rhs * &b + &q.rhs * &a;
                rest.push(Inequality::new(coeffs, rhs));
            }
        }
        system = rest;
    }
    tidy(system).is_some()
}

/// Drops trivial rows and duplicates (keeping the tightest bound). `None`
/// means a contradiction `0 ≥ positive` was found.
fn tidy(system: Vec<Inequality>) -> Option<Vec<Inequality>> {
    let mut rows: Vec<(IntVec, Rat)> = Vec::new();
    for row in system {
        if row.coeffs.iter().all(Zero::is_zero) {
            if row.rhs.is_positive() {
                return None;
            }
            continue;
        }
        if let Some(n) = row.normalized() {
            rows.push(n);
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    rows.dedup_by(|later, earlier| later.0 == earlier.0);
    Some(rows.into_iter().map(|(c, rhs)| Inequality::new(c.to_rat().entries().to_vec(), rhs)).collect())
}
