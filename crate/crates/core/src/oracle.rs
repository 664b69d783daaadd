//! Slow reference implementations that only use membership tests. Other
//! modules are checked against these.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{box_points, sort_graded, IntVec, Rat};
use crate::error::{check_dim, Error, Result};
use crate::monoid::Monoid;
use crate::stratify::Representation;

pub const DEFAULT_MAX_DEN: u64 = 60;

/// Inclusive per-coordinate upper bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds(Vec<i64>);

impl Bounds {
    pub fn new(bounds: Vec<u64>) -> Result<Self> {
        let b = bounds
            .into_iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::input("box bound too large")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Bounds(b))
    }

    pub fn uniform(dim: usize, b: u64) -> Result<Self> {
        Bounds::new(vec![b; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: &IntVec) -> bool {
        x.dim() == self.dim()
            && x.is_nonnegative()
            && x.entries().iter().zip(&self.0).all(|(v, &b)| v <= &BigInt::from(b))
    }

    pub fn points(&self) -> impl Iterator<Item = IntVec> + '_ {
        box_points(&self.0)
    }
}

/// `y ∈ M` for a possibly negative `y`.
fn member(m: &Monoid, y: &IntVec) -> Result<bool> {
    Ok(y.is_nonnegative() && m.contains(y)?)
}

/// Monoid elements in the box, graded order.
pub fn enum_monoid(m: &Monoid, b: &Bounds) -> Result<Vec<IntVec>> {
    check_dim(m.dim(), b.dim())?;
    let mut out = Vec::new();
    for x in b.points() {
        if m.contains(&x)? {
            out.push(x);
        }
    }
    sort_graded(&mut out);
    Ok(out)
}

/// Nonzero box elements that are not the sum of two nonzero box elements.
pub fn brute_atoms(m: &Monoid, b: &Bounds) -> Result<Vec<IntVec>> {
    let elements: Vec<IntVec> = enum_monoid(m, b)?.into_iter().filter(|x| !x.is_zero()).collect();
    let set: HashSet<&IntVec> = elements.iter().collect();
    let atoms = elements
        .iter()
        .filter(|x| !elements.iter().any(|y| y != *x && y.le(x) && set.contains(&(*x - y))))
        .cloned()
        .collect();
    Ok(atoms)
}

/// `max_{n ≤ max_den} max{m : ny − mx ∈ M} / n`, a lower bound for the
/// extraction grade that is exact once its denominator divides some
/// `n ≤ max_den`.
pub fn brute_grade(m: &Monoid, x: &IntVec, y: &IntVec, max_den: u64) -> Result<Rat> {
    check_dim(m.dim(), x.dim())?;
    check_dim(m.dim(), y.dim())?;
    if x.is_zero() || !x.is_nonnegative() {
        return Err(Error::input("the first argument must be nonzero and nonnegative"));
    }
    if max_den == 0 {
        return Err(Error::input("max_den must be positive"));
    }
    let mut best = Rat::zero();
    for n in 1..=max_den {
        let ny = y.scale(&BigInt::from(n));
        let mut k = 0u64;
        let mut top = None;
        loop {
            let rest = &ny - &x.scale(&BigInt::from(k));
            if !rest.is_nonnegative() {
                break;
            }
            if m.contains(&rest)? {
                top = Some(k);
            }
            k += 1;
        }
        if let Some(k) = top {
            best = best.max(Rat::new(BigInt::from(k), BigInt::from(n)));
        }
    }
    Ok(best)
}

/// Box elements `y` with `y − x ∉ M` for every `x` in `base`.
pub fn brute_apery(m: &Monoid, base: &[IntVec], b: &Bounds) -> Result<Vec<IntVec>> {
    let mut out = Vec::new();
    for y in enum_monoid(m, b)? {
        let mut outside = true;
        for x in base {
            if member(m, &(&y - x))? {
                outside = false;
                break;
            }
        }
        if outside {
            out.push(y);
        }
    }
    Ok(out)
}

/// Every choice of coefficients over `layers` that sums to `x` and whose
/// tails from each layer on avoid the ideal generated by the earlier layers.
pub fn brute_representations(m: &Monoid, layers: &[Vec<IntVec>], x: &IntVec) -> Result<Vec<Representation>> {
    check_dim(m.dim(), x.dim())?;
    if !m.contains(x)? {
        return Err(Error::input(format!("{x} is not in the monoid")));
    }
    for a in layers.iter().flatten() {
        check_dim(m.dim(), a.dim())?;
        if a.is_zero() || !a.is_nonnegative() {
            return Err(Error::input("layer atoms must be nonzero and nonnegative"));
        }
    }
    let prefixes: Vec<Vec<IntVec>> = (0..layers.len()).map(|i| layers[..i].concat()).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<Vec<BigInt>> = layers.iter().map(|l| vec![BigInt::zero(); l.len()]).collect();
    search(m, layers, &prefixes, x, layers.len(), IntVec::zeros(m.dim()), &mut chosen, &mut out)?;
    out.sort_by(|a, b| a.strata.cmp(&b.strata));
    Ok(out)
}

/// Fills layers from the last one down; `tail` is the sum of the layers
/// already filled.
#[allow(clippy::too_many_arguments)]
fn search(
    m: &Monoid,
    layers: &[Vec<IntVec>],
    prefixes: &[Vec<IntVec>],
    x: &IntVec,
    stage: usize,
    tail: IntVec,
    chosen: &mut Vec<Vec<BigInt>>,
    out: &mut Vec<Representation>,
) -> Result<()> {
    if stage < layers.len() && stage > 0 {
        // the tail starting at `stage` must be an Apéry element
        if !m.contains(&tail)? {
            return Ok(());
        }
        for q in &prefixes[stage] {
            if member(m, &(&tail - q))? {
                return Ok(());
            }
        }
    }
    if stage == 0 {
        if &tail == x {
            out.push(Representation { strata: chosen.clone(), value: x.clone() });
        }
        return Ok(());
    }
    let layer = &layers[stage - 1];
    fill(m, layers, prefixes, x, stage, layer, 0, tail, chosen, out)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    m: &Monoid,
    layers: &[Vec<IntVec>],
    prefixes: &[Vec<IntVec>],
    x: &IntVec,
    stage: usize,
    layer: &[IntVec],
    pos: usize,
    partial: IntVec,
    chosen: &mut Vec<Vec<BigInt>>,
    out: &mut Vec<Representation>,
) -> Result<()> {
    if pos == layer.len() {
        return search(m, layers, prefixes, x, stage - 1, partial, chosen, out);
    }
    let mut current = partial;
    let mut k = 0u64;
    while current.le(x) {
        chosen[stage - 1][pos] = BigInt::from(k);
        fill(m, layers, prefixes, x, stage, layer, pos + 1, current.clone(), chosen, out)?;
        current = &current + &layer[pos];
        k += 1;
    }
    chosen[stage - 1][pos] = BigInt::zero();
    Ok(())
}

/// Number of monoid elements in `[0, b]ⁿ`.
pub fn count_elements(m: &Monoid, b: u64) -> Result<usize> {
    Ok(enum_monoid(m, &Bounds::uniform(m.dim(), b)?)?.len())
}
