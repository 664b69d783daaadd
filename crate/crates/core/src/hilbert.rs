//! Hilbert bases, Apéry sets and primary representations.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{box_points, integer_kernel, sort_graded, IntVec};
use crate::cone::in_cone;
use crate::error::{check_dim, Error, Result};
use crate::monoid::{box_bound_i64, CongruenceSystem, GeneratedSemigroup, Monoid, MonoidKind};

/// Enumerations larger than this are refused.
pub const MAX_BOX_POINTS: u64 = 5_000_000;

/// Largest Apéry set the exact closure will build.
pub const MAX_APERY_SIZE: usize = 2_000_000;

pub fn hilbert_basis(m: &Monoid) -> Result<Vec<IntVec>> {
    m.hilbert_basis().map(<[IntVec]>::to_vec)
}

pub(crate) fn compute_atoms(m: &Monoid) -> Result<Vec<IntVec>> {
    match m.kind() {
        MonoidKind::Full(s) => full_atoms(s),
        MonoidKind::Generated(g) => generated_atoms(g),
    }
}

/// Componentwise upper bound for the atoms of a full monoid.
///
/// The cone `{x ≥ 0 : equations}` is spanned by its minimal-support
/// nonnegative kernel vectors. Scaling each to its least multiple in the
/// monoid and adding them up bounds every atom: an atom writes as a
/// nonnegative combination of independent such elements with all
/// coefficients below 1, since otherwise one of them splits off by fullness.
pub fn atom_box(system: &CongruenceSystem) -> Result<Vec<BigInt>> {
    let n = system.dim();
    let eqs: Vec<&IntVec> = system.equations().map(|r| &r.coeffs).collect();
    let rays: Vec<IntVec> = if eqs.is_empty() {
        (0..n).map(|j| IntVec::axis(n, j, BigInt::one())).collect()
    } else {
        extreme_kernel_rays(n, &eqs)?
    };
    let mut bound = vec![BigInt::zero(); n];
    for r in &rays {
        let m = least_multiple_in(system, r)?;
        for (b, x) in bound.iter_mut().zip(m.entries()) {
            *b += x;
        }
    }
    Ok(bound)
}

/// Nonnegative vectors of minimal support in `{x : A·x = 0}`.
fn extreme_kernel_rays(n: usize, eqs: &[&IntVec]) -> Result<Vec<IntVec>> {
    if n > 16 {
        return Err(Error::unsupported("too many variables for support enumeration"));
    }
    let mut rays = Vec::new();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let columns: Vec<IntVec> =
            support.iter().map(|&j| IntVec::new(eqs.iter().map(|e| e[j].clone()).collect())).collect();
        let ker = integer_kernel(&columns);
        if ker.len() != 1 {
            continue;
        }
        let k = &ker[0];
        let sign = if k.entries().iter().all(Signed::is_positive) {
            BigInt::one()
        } else if k.entries().iter().all(Signed::is_negative) {
            -BigInt::one()
        } else {
            continue;
        };
        let mut entries = vec![BigInt::zero(); n];
        for (&j, x) in support.iter().zip(k.entries()) {
            entries[j] = x * &sign;
        }
        rays.push(IntVec::new(entries));
    }
    Ok(rays)
}

fn least_multiple_in(system: &CongruenceSystem, ray: &IntVec) -> Result<IntVec> {
    let d = system.modulus_lcm();
    for k in 1..=d {
        let v = ray.scale(&BigInt::from(k));
        if system.holds(&v) {
            return Ok(v);
        }
    }
    Err(Error::internal(format!("no multiple of {ray} up to {d} satisfies the system")))
}

fn full_atoms(system: &CongruenceSystem) -> Result<Vec<IntVec>> {
    let bound = atom_box(system)?;
    let bounds: Vec<i64> = bound
        .iter()
        .map(|b| b.to_i64().ok_or_else(|| Error::unsupported("atom box too large")))
        .collect::<Result<_>>()?;
    let size = bounds.iter().try_fold(1u64, |acc, &b| acc.checked_mul(b as u64 + 1));
    if size.is_none_or(|s| s > MAX_BOX_POINTS) {
        return Err(Error::unsupported(format!("atom box {bounds:?} exceeds {MAX_BOX_POINTS} points")));
    }
    let mut members: Vec<IntVec> = box_points(&bounds).skip(1).filter(|x| system.holds(x)).collect();
    sort_graded(&mut members);
    // by fullness, x is reducible iff some smaller atom lies below it
    let mut atoms: Vec<IntVec> = Vec::new();
    for x in members {
        if !atoms.iter().any(|a| a.le(&x)) {
            atoms.push(x);
        }
    }
    log::debug!("{} atoms in box {:?}", atoms.len(), bounds);
    Ok(atoms)
}

fn generated_atoms(g: &GeneratedSemigroup) -> Result<Vec<IntVec>> {
    let gens = g.generators();
    let mut atoms = Vec::new();
    for (i, x) in gens.iter().enumerate() {
        let others: Vec<IntVec> = gens.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.clone()).collect();
        let reducible = !others.is_empty() && Monoid::from_generators(others)?.contains(x)?;
        if !reducible {
            atoms.push(x.clone());
        }
    }
    Ok(atoms)
}

/// `Ap(M, X) = M ∖ (X + M)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AperySet {
    pub base: Vec<IntVec>,
    pub elements: Vec<IntVec>,
    /// True when `elements` is the whole Apéry set; otherwise it is the part
    /// inside `[0, box_bound]ⁿ`.
    pub complete: bool,
    pub box_bound: Option<u64>,
}

impl AperySet {
    pub fn contains(&self, x: &IntVec) -> bool {
        self.elements.binary_search_by(|e| crate::arith::graded_cmp(e, x)).is_ok()
    }
}

/// Whether `y ∉ X + M`.
pub fn outside_ideal(m: &Monoid, base: &[IntVec], y: &IntVec) -> Result<bool> {
    for x in base {
        if x.le(y) && m.contains(&(y - x))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Apéry set of `M` with respect to `base`.
///
/// When every atom lies in `cone(base)` the set is finite and is built
/// exactly by closing `{0}` under adding atoms (Apéry sets are closed under
/// taking summands). Otherwise the members of `M` in `[0, box_bound]ⁿ` are
/// filtered and the result is flagged incomplete.
pub fn apery(m: &Monoid, base: &[IntVec], box_bound: u64) -> Result<AperySet> {
    let mut base_sorted = base.to_vec();
    for x in &base_sorted {
        check_dim(m.dim(), x.dim())?;
        if x.is_zero() {
            return Err(Error::input("Apéry base elements must be nonzero"));
        }
        if !m.contains(x)? {
            return Err(Error::input(format!("{x} is not in the monoid")));
        }
    }
    sort_graded(&mut base_sorted);
    let atoms = m.hilbert_basis()?.to_vec();
    let finite = atoms.iter().map(|a| in_cone(a, &base_sorted)).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b);
    if finite {
        let elements = apery_closure(m, &base_sorted, &atoms)?;
        return Ok(AperySet { base: base_sorted, elements, complete: true, box_bound: None });
    }
    if box_bound == 0 {
        return Err(Error::input("box bound must be positive"));
    }
    let bounds = vec![box_bound_i64(box_bound)?; m.dim()];
    let mut elements = Vec::new();
    for y in box_points(&bounds) {
        if m.contains(&y)? && outside_ideal(m, &base_sorted, &y)? {
            elements.push(y);
        }
    }
    sort_graded(&mut elements);
    Ok(AperySet { base: base_sorted, elements, complete: false, box_bound: Some(box_bound) })
}

fn apery_closure(m: &Monoid, base: &[IntVec], atoms: &[IntVec]) -> Result<Vec<IntVec>> {
    let steps: Vec<&IntVec> = atoms.iter().filter(|a| !base.contains(a)).collect();
    let mut seen: HashSet<IntVec> = HashSet::new();
    let zero = IntVec::zeros(m.dim());
    seen.insert(zero.clone());
    let mut frontier = vec![zero];
    while !frontier.is_empty() {
        let mut next = BTreeSet::new();
        for w in &frontier {
            for a in &steps {
                let y = w + a;
                if seen.contains(&y) || next.contains(&y) {
                    continue;
                }
                if outside_ideal(m, base, &y)? {
                    next.insert(y);
                }
            }
        }
        seen.extend(next.iter().cloned());
        if seen.len() > MAX_APERY_SIZE {
            return Err(Error::unsupported("Apéry set too large"));
        }
        frontier = next.into_iter().collect();
    }
    let mut out: Vec<IntVec> = seen.into_iter().collect();
    sort_graded(&mut out);
    Ok(out)
}

/// Primary representation in a one-dimensional monoid.
///
/// Coefficients are chosen greedily along `order`: each is the largest value
/// that keeps the remainder inside the monoid.
pub fn primary_representation(m: &Monoid, x: &IntVec, order: &[IntVec]) -> Result<Vec<BigInt>> {
    if m.dim() != 1 {
        return Err(Error::input("primary representations need a one-dimensional monoid"));
    }
    check_dim(1, x.dim())?;
    for g in order {
        check_dim(1, g.dim())?;
        if !g[0].is_positive() {
            return Err(Error::input("generators must be positive"));
        }
    }
    let mut sorted = order.to_vec();
    sorted.sort();
    let mut expected = m.hilbert_basis()?.to_vec();
    expected.sort();
    if sorted != expected {
        return Err(Error::input("order must list each atom exactly once"));
    }
    if !m.contains(x)? {
        return Err(Error::input(format!("{x} is not in the monoid")));
    }
    let mut rest = x[0].clone();
    let mut coeffs = Vec::with_capacity(order.len());
    for g in order {
        let n = &g[0];
        let mut k = rest.div_floor(n);
        while !k.is_zero() && !m.contains(&IntVec::new(vec![&rest - &k * n]))? {
            k -= 1;
        }
        rest -= &k * n;
        coeffs.push(k);
    }
    if !rest.is_zero() {
        return Err(Error::internal(format!("greedy representation of {x} left remainder {rest}")));
    }
    Ok(coeffs)
}
