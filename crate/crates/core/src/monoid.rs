//! Affine monoids: full semigroups cut out by congruences and equations, and
//! semigroups generated by explicit vectors.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{box_points, graded_cmp, integer_relations, sort_graded, IntVec, LatticeBasis};
use crate::cone::{in_cone, ConeFacets, MAX_FACET_DIM};
use crate::error::{check_dim, Error, Result};

/// One defining condition `coeffs · x ≡ 0 (mod modulus)`; modulus 0 means
/// the equation `coeffs · x = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CongruenceRow {
    pub coeffs: IntVec,
    #[serde(rename = "mod")]
    pub modulus: u64,
}

impl CongruenceRow {
    pub fn is_equation(&self) -> bool {
        self.modulus == 0
    }

    pub fn holds(&self, x: &IntVec) -> bool {
        let s = self.coeffs.dot(x);
        if self.modulus == 0 {
            s.is_zero()
        } else {
            (s % BigInt::from(self.modulus)).is_zero()
        }
    }
}

/// `{x ∈ ℕⁿ : every row holds}`.
///
/// Congruence coefficients are stored reduced into `[0, modulus)`; rows that
/// hold identically are dropped, so an empty row list describes ℕⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CongruenceSystem {
    dim: usize,
    rows: Vec<CongruenceRow>,
}

impl CongruenceSystem {
    pub fn new(dim: usize, rows: Vec<CongruenceRow>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            check_dim(dim, row.coeffs.dim())?;
            if row.modulus == 1 {
                return Err(Error::input("modulus 1 is vacuous; use 0 for equations or d ≥ 2"));
            }
            let coeffs = if row.modulus == 0 {
                row.coeffs
            } else {
                let d = BigInt::from(row.modulus);
                IntVec::new(row.coeffs.entries().iter().map(|c| c.mod_floor(&d)).collect())
            };
            if !coeffs.is_zero() {
                out.push(CongruenceRow { coeffs, modulus: row.modulus });
            }
        }
        Ok(CongruenceSystem { dim, rows: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[CongruenceRow] {
        &self.rows
    }

    pub fn holds(&self, x: &IntVec) -> bool {
        self.rows.iter().all(|r| r.holds(x))
    }

    pub fn equations(&self) -> impl Iterator<Item = &CongruenceRow> {
        self.rows.iter().filter(|r| r.is_equation())
    }

    /// Least common multiple of the congruence moduli (1 when there are
    /// none).
    pub fn modulus_lcm(&self) -> u64 {
        self.rows.iter().filter(|r| !r.is_equation()).fold(1u64, |l, r| l.lcm(&r.modulus))
    }

    /// Integer solutions of the system in ℤⁿ, ignoring the sign condition.
    pub fn solution_lattice(&self) -> Result<LatticeBasis> {
        // x with A·x − D·k = 0 for some k; project the relation lattice
        let n = self.dim;
        let m = self.rows.len();
        if m == 0 {
            return LatticeBasis::from_generators(
                n,
                &(0..n).map(|j| IntVec::axis(n, j, BigInt::one())).collect::<Vec<_>>(),
            );
        }
        let mut columns: Vec<IntVec> =
            (0..n).map(|j| IntVec::new(self.rows.iter().map(|r| r.coeffs[j].clone()).collect())).collect();
        for (i, r) in self.rows.iter().enumerate() {
            columns.push(IntVec::axis(m, i, -BigInt::from(r.modulus)));
        }
        let rel = integer_relations(&columns)?;
        let projected: Vec<IntVec> = rel.rows().iter().map(|r| IntVec::new(r.entries()[..n].to_vec())).collect();
        LatticeBasis::from_generators(n, &projected)
    }
}

/// Semigroup generated by nonzero vectors of ℕⁿ, stored deduplicated in
/// graded order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GeneratedSemigroup {
    dim: usize,
    generators: Vec<IntVec>,
}

impl GeneratedSemigroup {
    pub fn new(generators: Vec<IntVec>) -> Result<Self> {
        let dim =
            generators.first().map(IntVec::dim).ok_or_else(|| Error::input("at least one generator is required"))?;
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        let mut gens = generators;
        for g in &gens {
            check_dim(dim, g.dim())?;
            if !g.is_nonnegative() {
                return Err(Error::input(format!("generator {g} has a negative entry")));
            }
            if g.is_zero() {
                return Err(Error::input("the zero vector is not a valid generator"));
            }
        }
        sort_graded(&mut gens);
        Ok(GeneratedSemigroup { dim, generators: gens })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MonoidKind {
    Full(CongruenceSystem),
    Generated(GeneratedSemigroup),
}

/// An affine monoid with lazily computed, write-once caches.
pub struct Monoid {
    kind: MonoidKind,
    atoms: OnceLock<Result<Vec<IntVec>>>,
    facets: OnceLock<Result<ConeFacets>>,
    lattice: OnceLock<Result<LatticeBasis>>,
    memo: Mutex<HashMap<IntVec, bool>>,
}

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monoid").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl Clone for Monoid {
    fn clone(&self) -> Self {
        Monoid::from_kind(self.kind.clone())
    }
}

impl PartialEq for Monoid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Monoid {
    fn from_kind(kind: MonoidKind) -> Self {
        Monoid {
            kind,
            atoms: OnceLock::new(),
            facets: OnceLock::new(),
            lattice: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn full(system: CongruenceSystem) -> Self {
        Self::from_kind(MonoidKind::Full(system))
    }

    pub fn generated(semigroup: GeneratedSemigroup) -> Self {
        Self::from_kind(MonoidKind::Generated(semigroup))
    }

    /// Full monoid from `(coefficients, modulus)` pairs.
    pub fn from_congruences(dim: usize, rows: &[(IntVec, u64)]) -> Result<Self> {
        let rows = rows.iter().map(|(c, m)| CongruenceRow { coeffs: c.clone(), modulus: *m }).collect();
        Ok(Self::full(CongruenceSystem::new(dim, rows)?))
    }

    pub fn from_generators(generators: Vec<IntVec>) -> Result<Self> {
        Ok(Self::generated(GeneratedSemigroup::new(generators)?))
    }

    /// Parses the JSON monoid description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MonoidSpec =
            serde_json::from_str(text).map_err(|e| Error::input(format!("malformed monoid description: {e}")))?;
        spec.build()
    }

    pub fn kind(&self) -> &MonoidKind {
        &self.kind
    }

    pub fn is_full(&self) -> bool {
        matches!(self.kind, MonoidKind::Full(_))
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MonoidKind::Full(s) => s.dim(),
            MonoidKind::Generated(g) => g.dim(),
        }
    }

    /// Whether `x` belongs to the monoid.
    ///
    /// For generated monoids this is a depth-first search over generator
    /// subtractions, memoized across calls.
    pub fn contains(&self, x: &IntVec) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if !x.is_nonnegative() {
            return Ok(false);
        }
        Ok(match &self.kind {
            MonoidKind::Full(s) => s.holds(x),
            MonoidKind::Generated(g) => {
                let mut memo = self.memo.lock().unwrap_or_else(|p| p.into_inner());
                generated_member(x, g.generators(), &mut memo)
            }
        })
    }

    /// Atoms of the monoid in graded order. Computed once.
    pub fn hilbert_basis(&self) -> Result<&[IntVec]> {
        self.atoms.get_or_init(|| crate::hilbert::compute_atoms(self)).as_ref().map(Vec::as_slice).map_err(Clone::clone)
    }

    /// Facet normals of the cone spanned by the monoid. Computed once.
    pub fn facets(&self) -> Result<&ConeFacets> {
        self.facets
            .get_or_init(|| {
                let gens = self.cone_generators()?;
                ConeFacets::of(self.dim(), &gens)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Canonical basis of the group generated by the monoid. Computed once.
    pub fn group_lattice(&self) -> Result<&LatticeBasis> {
        self.lattice
            .get_or_init(|| LatticeBasis::from_generators(self.dim(), self.hilbert_basis()?))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// A finite set whose cone is the cone of the monoid.
    pub fn cone_generators(&self) -> Result<Vec<IntVec>> {
        match &self.kind {
            MonoidKind::Generated(g) => Ok(g.generators().to_vec()),
            MonoidKind::Full(_) => Ok(self.hilbert_basis()?.to_vec()),
        }
    }

    /// Whether `x` lies in the rational cone spanned by the monoid.
    pub fn cone_contains(&self, x: &IntVec) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if self.dim() <= MAX_FACET_DIM {
            let f = self.facets()?;
            let mut with_x = self.cone_generators()?;
            with_x.push(x.clone());
            Ok(crate::arith::rank(&with_x) == f.rank() && f.satisfies(x))
        } else {
            in_cone(x, &self.cone_generators()?)
        }
    }

    /// Root-closure check.
    ///
    /// Full monoids are root-closed. For generated monoids the box
    /// `[0, box_bound]ⁿ` is searched in graded order for a point of
    /// `G(M) ∩ cone(M)` outside `M` having a multiple `k·x ∈ M` with
    /// `k ≤ 4·box_bound`.
    pub fn is_root_closed(&self, box_bound: u64) -> Result<RootClosure> {
        if box_bound == 0 {
            return Err(Error::input("box bound must be positive"));
        }
        if self.is_full() {
            return Ok(RootClosure { root_closed: true, witness: None, multiple: None, box_bound: None });
        }
        let lattice = self.group_lattice()?.clone();
        let bounds = vec![box_bound_i64(box_bound)?; self.dim()];
        let mut points: Vec<IntVec> = box_points(&bounds).collect();
        points.sort_by(graded_cmp);
        for x in points.into_iter().skip(1) {
            if !lattice.contains(&x)? || self.contains(&x)? || !self.cone_contains(&x)? {
                continue;
            }
            for k in 2..=4 * box_bound {
                if self.contains(&x.scale(&BigInt::from(k)))? {
                    return Ok(RootClosure {
                        root_closed: false,
                        witness: Some(x),
                        multiple: Some(k),
                        box_bound: Some(box_bound),
                    });
                }
            }
        }
        Ok(RootClosure { root_closed: true, witness: None, multiple: None, box_bound: Some(box_bound) })
    }
}

pub(crate) fn box_bound_i64(b: u64) -> Result<i64> {
    b.to_i64().ok_or_else(|| Error::input("box bound too large"))
}

fn generated_member(x: &IntVec, gens: &[IntVec], memo: &mut HashMap<IntVec, bool>) -> bool {
    if x.is_zero() {
        return true;
    }
    if let Some(&known) = memo.get(x) {
        return known;
    }
    let found = gens.iter().any(|g| g.le(x) && generated_member(&(x - g), gens, memo));
    memo.insert(x.clone(), found);
    found
}

/// Result of [`Monoid::is_root_closed`]. `box_bound` is `None` when the
/// answer is exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootClosure {
    pub root_closed: bool,
    pub witness: Option<IntVec>,
    pub multiple: Option<u64>,
    pub box_bound: Option<u64>,
}

/// The isomorphism `(x, y) ↦ (x, y, (ax + by)/c)` from the congruence monoid
/// onto the solutions of `ax + by = cz`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ElliottEmbedding {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl ElliottEmbedding {
    pub fn embed(&self, x: &IntVec) -> Result<IntVec> {
        check_dim(2, x.dim())?;
        let s = &x[0] * BigInt::from(self.a) + &x[1] * BigInt::from(self.b);
        let c = BigInt::from(self.c);
        if !s.is_multiple_of(&c) || x.entries().iter().any(Signed::is_negative) {
            return Err(Error::input(format!("{x} is not a solution")));
        }
        Ok(IntVec::new(vec![x[0].clone(), x[1].clone(), s / c]))
    }
}

/// `{(x, y) ∈ ℕ² : ax + by ≡ 0 (mod c)}` with its embedding into the
/// solutions of `ax + by = cz`.
pub fn elliott_monoid(a: u64, b: u64, c: u64) -> Result<(Monoid, ElliottEmbedding)> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::input("a, b and c must be positive"));
    }
    let rows = if c == 1 { Vec::new() } else { vec![(IntVec::from_i64s(&[a as i64, b as i64]), c)] };
    let m = Monoid::from_congruences(2, &rows)?;
    Ok((m, ElliottEmbedding { a, b, c }))
}

/// JSON description of a monoid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MonoidSpec {
    Congruence { dim: usize, rows: Vec<CongruenceRow> },
    Generators { vectors: Vec<IntVec> },
    Elliott { a: u64, b: u64, c: u64 },
}

impl MonoidSpec {
    pub fn build(self) -> Result<Monoid> {
        match self {
            MonoidSpec::Congruence { dim, rows } => Ok(Monoid::full(CongruenceSystem::new(dim, rows)?)),
            MonoidSpec::Generators { vectors } => Monoid::from_generators(vectors),
            MonoidSpec::Elliott { a, b, c } => Ok(elliott_monoid(a, b, c)?.0),
        }
    }
}
