//! Extraction grades, atom classification and coordinates with respect to
//! an independent set of atoms.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Serialize, Serializer};

use crate::arith::{is_independent, rank, solve_rational_system, IntVec, Rat, RatVec};
use crate::cone::{in_cone, ConeFacets};
use crate::error::{check_dim, Error, Result};
use crate::monoid::Monoid;

pub fn cone_facets(m: &Monoid) -> Result<&ConeFacets> {
    m.facets()
}

/// A value of the extraction grade.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grade {
    Finite(Rat),
    Infinite,
}

impl Grade {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Grade::Finite(r) => Some(r),
            Grade::Infinite => None,
        }
    }

    pub fn below_one(&self) -> bool {
        matches!(self, Grade::Finite(r) if r < &Rat::one())
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Finite(r) => write!(f, "{r}"),
            Grade::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Grade {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `min v(y)/v(x)` over the facet normals `v` with `v(x) > 0`.
pub fn grade_from_facets(facets: &ConeFacets, x: &IntVec, y: &IntVec) -> Grade {
    facets
        .normals()
        .iter()
        .filter_map(|v| {
            let vx = v.dot(x);
            vx.is_positive().then(|| Rat::new(v.dot(y), vx))
        })
        .min()
        .map_or(Grade::Infinite, Grade::Finite)
}

/// Extraction grade of `y` with respect to `x`, both in `M`, `x ≠ 0`.
pub fn extraction_grade(m: &Monoid, x: &IntVec, y: &IntVec) -> Result<Grade> {
    check_dim(m.dim(), x.dim())?;
    check_dim(m.dim(), y.dim())?;
    if x.is_zero() {
        return Err(Error::input("the extraction grade needs a nonzero first argument"));
    }
    for v in [x, y] {
        if !m.contains(v)? {
            return Err(Error::input(format!("{v} is not in the monoid")));
        }
    }
    Ok(grade_from_facets(m.facets()?, x, y))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtomClassification {
    pub atom: IntVec,
    pub extremal: bool,
    pub pure: bool,
    pub strong: bool,
}

fn same_ray(a: &IntVec, b: &IntVec) -> bool {
    rank(&[a.clone(), b.clone()]) == 1
}

/// Classification of `a` among the atoms `atoms` of the monoid they
/// generate.
///
/// `a` spans an extremal ray when it is outside the cone of the atoms off
/// its ray; pure atoms of an affine monoid are exactly those. It is strong
/// when, in addition, it is the only atom on its ray, which makes `ℕa` a
/// face.
pub fn classify_among(atoms: &[IntVec], a: &IntVec) -> Result<AtomClassification> {
    let off_ray: Vec<IntVec> = atoms.iter().filter(|b| !same_ray(a, b)).cloned().collect();
    let extremal = !in_cone(a, &off_ray)?;
    let alone = atoms.iter().filter(|b| same_ray(a, b)).count() == 1;
    Ok(AtomClassification { atom: a.clone(), extremal, pure: extremal, strong: extremal && alone })
}

pub fn classify_atom(m: &Monoid, a: &IntVec) -> Result<AtomClassification> {
    check_dim(m.dim(), a.dim())?;
    let atoms = m.hilbert_basis()?;
    if !atoms.contains(a) {
        return Err(Error::input(format!("{a} is not an atom")));
    }
    classify_among(atoms, a)
}

pub fn classify_all(m: &Monoid) -> Result<Vec<AtomClassification>> {
    let atoms = m.hilbert_basis()?;
    atoms.iter().map(|a| classify_among(atoms, a)).collect()
}

/// The unique nonnegative rationals `r` with `x = Σ r_q q`.
pub fn coordinates(x: &IntVec, base: &[IntVec]) -> Result<RatVec> {
    for q in base {
        check_dim(x.dim(), q.dim())?;
    }
    if !is_independent(base) {
        return Err(Error::input("base is linearly dependent"));
    }
    let c =
        solve_rational_system(base, x)?.ok_or_else(|| Error::input(format!("{x} is outside the span of the base")))?;
    if c.entries().iter().any(Signed::is_negative) {
        return Err(Error::input(format!("{x} is outside the cone of the base")));
    }
    Ok(c)
}

/// Whether every coordinate of `x` lies in `[0, 1)`.
pub fn in_diamond(x: &IntVec, base: &[IntVec]) -> Result<bool> {
    let c = coordinates(x, base)?;
    Ok(c.entries().iter().all(|r| r < &Rat::one()))
}

/// Least `m ≥ 1` with `m·x` an integer combination of the base.
pub fn coset_order(x: &IntVec, base: &[IntVec]) -> Result<BigInt> {
    Ok(coordinates(x, base)?.denominator_lcm())
}

/// Whether `base` is an independent set of atoms whose cone contains every
/// atom.
pub fn is_inside_factorial_base(m: &Monoid, base: &[IntVec]) -> Result<bool> {
    let atoms = m.hilbert_basis()?;
    for q in base {
        check_dim(m.dim(), q.dim())?;
        if !atoms.contains(q) {
            return Err(Error::input(format!("{q} is not an atom")));
        }
    }
    if base.is_empty() || !is_independent(base) {
        return Ok(false);
    }
    for a in atoms {
        match solve_rational_system(base, a)? {
            Some(c) if c.entries().iter().all(|r| !r.is_negative()) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}
