//! Zero-sum sequences over a finite subset of `ℤ_{d₁} × ⋯ × ℤ_{d_r} × ℤᵏ`,
//! viewed as the full semigroup of their multiplicity vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::IntVec;
use crate::error::{check_dim, Error, Result};
use crate::monoid::{CongruenceRow, CongruenceSystem, Monoid};

/// Largest `|G₀|` accepted by [`is_elementary`].
pub const MAX_BLOCK_ELEMENTS: usize = 12;

/// A group `ℤ_{d₁} × ⋯ × ℤ_{d_r} × ℤᵏ` and a list of distinct elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroupSpec")]
pub struct GroupSpec {
    moduli: Vec<u64>,
    free_rank: usize,
    elements: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawGroupSpec {
    moduli: Vec<u64>,
    #[serde(default)]
    free_rank: usize,
    elements: Vec<Vec<i64>>,
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = Error;

    fn try_from(raw: RawGroupSpec) -> Result<Self> {
        GroupSpec::new(raw.moduli, raw.free_rank, raw.elements)
    }
}

impl GroupSpec {
    /// Reduces torsion coordinates into `[0, d_i)` and rejects duplicates.
    pub fn new(moduli: Vec<u64>, free_rank: usize, elements: Vec<Vec<i64>>) -> Result<Self> {
        if moduli.iter().any(|&d| d < 2) {
            return Err(Error::input("torsion moduli must be at least 2"));
        }
        if elements.is_empty() {
            return Err(Error::input("the element list is empty"));
        }
        let width = moduli.len() + free_rank;
        if width == 0 {
            return Err(Error::input("the group is trivial"));
        }
        let mut reduced: Vec<Vec<i64>> = Vec::with_capacity(elements.len());
        for g in elements {
            check_dim(width, g.len())?;
            let g: Vec<i64> =
                g.iter().enumerate().map(|(i, &c)| moduli.get(i).map_or(c, |&d| c.mod_floor(&(d as i64)))).collect();
            if reduced.contains(&g) {
                return Err(Error::input(format!("duplicate group element {g:?}")));
            }
            reduced.push(g);
        }
        Ok(GroupSpec { moduli, free_rank, elements: reduced })
    }

    /// `G₀ = {1̄, …, (d−1)̄}`-style subsets of a cyclic group.
    pub fn cyclic(d: u64, elements: &[i64]) -> Result<Self> {
        GroupSpec::new(vec![d], 0, elements.iter().map(|&g| vec![g]).collect())
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Whether `Σ x_g g = 0` in the group.
    pub fn is_zero_sum(&self, x: &IntVec) -> Result<bool> {
        check_dim(self.len(), x.dim())?;
        for c in 0..self.moduli.len() + self.free_rank {
            let s: BigInt = self.elements.iter().zip(x.entries()).map(|(g, m)| m * g[c]).sum();
            let zero = match self.moduli.get(c) {
                Some(&d) => s.is_multiple_of(&BigInt::from(d)),
                None => s == BigInt::from(0),
            };
            if !zero {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sequence(&self, x: IntVec) -> Result<ZeroSumSequence> {
        if !x.is_nonnegative() {
            return Err(Error::input("multiplicities must be nonnegative"));
        }
        if !self.is_zero_sum(&x)? {
            return Err(Error::input(format!("{x} is not a zero-sum sequence")));
        }
        Ok(ZeroSumSequence(x))
    }

    fn column_rows(&self, columns: &[usize]) -> Vec<CongruenceRow> {
        let column = |c: usize| IntVec::from(columns.iter().map(|&j| self.elements[j][c]).collect::<Vec<_>>());
        let torsion = self.moduli.iter().enumerate().map(|(c, &d)| CongruenceRow { coeffs: column(c), modulus: d });
        let free = (self.moduli.len()..self.moduli.len() + self.free_rank)
            .map(|c| CongruenceRow { coeffs: column(c), modulus: 0 });
        torsion.chain(free).collect()
    }
}

/// Multiplicities of a zero-sum sequence, indexed like the element list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ZeroSumSequence(IntVec);

impl ZeroSumSequence {
    pub fn multiplicities(&self) -> &IntVec {
        &self.0
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, m)| m.sign() != num_bigint::Sign::NoSign)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One congruence per torsion component and one equation per free
/// component, in the multiplicities of the elements.
pub fn block_to_congruence(g: &GroupSpec) -> Result<CongruenceSystem> {
    let all: Vec<usize> = (0..g.len()).collect();
    CongruenceSystem::new(g.len(), g.column_rows(&all))
}

pub fn block_monoid(g: &GroupSpec) -> Result<Monoid> {
    Ok(Monoid::full(block_to_congruence(g)?))
}

/// Whether some nonzero zero-sum sequence is supported inside `columns`.
fn has_zero_sum_on(g: &GroupSpec, columns: &[usize]) -> Result<bool> {
    if g.free_rank == 0 {
        // every element of a finite group has finite order
        return Ok(!columns.is_empty());
    }
    let system = CongruenceSystem::new(columns.len(), g.column_rows(columns))?;
    Ok(!Monoid::full(system).hilbert_basis()?.is_empty())
}

/// Whether the atom `a` has inclusion-minimal support among nonzero
/// zero-sum sequences.
///
/// Only the subsets obtained by dropping one support element need checking,
/// since a sequence on a smaller support lives on one of them.
pub fn is_elementary(g: &GroupSpec, a: &ZeroSumSequence) -> Result<bool> {
    if g.len() > MAX_BLOCK_ELEMENTS {
        return Err(Error::unsupported(format!(
            "support search is limited to {MAX_BLOCK_ELEMENTS} elements, got {}",
            g.len()
        )));
    }
    check_dim(g.len(), a.0.dim())?;
    let support = a.support();
    if support.is_empty() {
        return Err(Error::input("the empty sequence is not an atom"));
    }
    if !block_monoid(g)?.hilbert_basis()?.contains(&a.0) {
        return Err(Error::input(format!("{} is not an atom", a.0)));
    }
    for skip in 0..support.len() {
        let sub: Vec<usize> = support.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &c)| c).collect();
        if has_zero_sum_on(g, &sub)? {
            return Ok(false);
        }
    }
    Ok(true)
}
