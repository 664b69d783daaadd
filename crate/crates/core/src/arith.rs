//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) and
//! reduced rationals ([`Rat`]); no floating point is used anywhere in the
//! crate. Vectors are plain value types and every operation is a pure
//! function of its arguments.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

/// Reduced rational with positive denominator.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_rat(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Builds an [`IntVec`] from integer literals.
#[macro_export]
macro_rules! ivec {
    ($($x:expr),* $(,)?) => {
        $crate::arith::IntVec::from_i64s(&[$($x as i64),*])
    };
}

/// Integer vector of fixed dimension.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IntVec(Vec<BigInt>);

impl IntVec {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVec(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        IntVec(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        IntVec(vec![BigInt::zero(); dim])
    }

    /// `scale * e_j`.
    pub fn axis(dim: usize, j: usize, scale: BigInt) -> Self {
        let mut v = Self::zeros(dim);
        v.0[j] = scale;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &IntVec) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn dot(&self, other: &IntVec) -> BigInt {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: &BigInt) -> IntVec {
        IntVec(self.0.iter().map(|x| x * k).collect())
    }

    /// Sum of the entries; the total degree for vectors in ℕⁿ.
    pub fn degree(&self) -> BigInt {
        self.0.iter().sum()
    }

    /// Greatest common divisor of the entries (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    /// Divides out the content; the zero vector is returned unchanged.
    pub fn primitive(&self) -> IntVec {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntVec(self.0.iter().map(|x| x / &g).collect())
    }

    pub fn to_rat(&self) -> RatVec {
        RatVec(self.0.iter().map(int_rat).collect())
    }

    /// Entries as `i64` when they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

impl Index<usize> for IntVec {
    type Output = BigInt;

    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl Add for &IntVec {
    type Output = IntVec;

    fn add(self, rhs: &IntVec) -> IntVec {
        assert_eq!(self.dim(), rhs.dim(), "vector dimensions differ");
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVec {
    type Output = IntVec;

    fn sub(self, rhs: &IntVec) -> IntVec {
        assert_eq!(self.dim(), rhs.dim(), "vector dimensions differ");
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVec {
    type Output = IntVec;

    fn neg(self) -> IntVec {
        IntVec(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for IntVec {
    fn from(v: Vec<i64>) -> Self {
        IntVec::from_i64s(&v)
    }
}

pub(crate) fn serialize_int<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

/// JSON integer that may also arrive as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_int(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = JsonInt;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a decimal string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JsonInt, E> {
                Ok(JsonInt(v.into()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JsonInt, E> {
                Ok(JsonInt(v.into()))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<JsonInt, E> {
                v.trim().parse::<BigInt>().map(JsonInt).map_err(|_| E::custom(format!("not an integer: {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for IntVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for x in &self.0 {
            seq.serialize_element(&JsonInt(x.clone()))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = IntVec;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of integers")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<IntVec, A::Error> {
                let mut out = Vec::new();
                while let Some(JsonInt(x)) = seq.next_element()? {
                    out.push(x);
                }
                Ok(IntVec(out))
            }
        }
        d.deserialize_seq(V)
    }
}

/// Total degree first, then lexicographic. This is the canonical order for
/// every set of vectors the crate emits.
pub fn graded_cmp(a: &IntVec, b: &IntVec) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| a.cmp(b))
}

/// Sorts in graded-lexicographic order and removes duplicates.
pub fn sort_graded(v: &mut Vec<IntVec>) {
    v.sort_by(graded_cmp);
    v.dedup();
}

/// Rational vector of fixed dimension.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatVec(Vec<Rat>);

impl RatVec {
    pub fn new(entries: Vec<Rat>) -> Self {
        RatVec(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|r| r.is_integer())
    }

    /// Least common multiple of the denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()))
    }

    pub fn floor(&self) -> Vec<BigInt> {
        self.0.iter().map(|r| r.floor().to_integer()).collect()
    }
}

impl Index<usize> for RatVec {
    type Output = Rat;

    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RatVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|r| r.to_string()))
    }
}

fn shared_dim(vectors: &[IntVec]) -> Result<usize> {
    let dim = vectors.first().map(IntVec::dim).ok_or_else(|| Error::input("empty vector list"))?;
    for v in vectors {
        check_dim(dim, v.dim())?;
    }
    Ok(dim)
}

/// Reduced row echelon form over ℚ; returns the pivot columns.
pub(crate) fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over ℚ.
pub fn rank(vectors: &[IntVec]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<Rat>> = vectors.iter().map(|v| v.to_rat().0).collect();
    rref(&mut m).len()
}

pub fn is_independent(vectors: &[IntVec]) -> bool {
    rank(vectors) == vectors.len()
}

/// Basis of the rational kernel `{c : Σ c_j columns_j = 0}`, each scaled to
/// a primitive integer vector.
pub fn integer_kernel(columns: &[IntVec]) -> Vec<IntVec> {
    let k = columns.len();
    if k == 0 {
        return Vec::new();
    }
    let n = columns[0].dim();
    // rows = coordinates, cols = the given vectors
    let mut m: Vec<Vec<Rat>> = (0..n).map(|i| columns.iter().map(|c| int_rat(&c[i])).collect()).collect();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..k).filter(|j| !pivots.contains(j)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); k];
            v[f] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -m[row][f].clone();
            }
            clear_denominators(&v)
        })
        .collect()
}

/// Smallest positive multiple of a rational vector that is integral, made
/// primitive.
pub fn clear_denominators(v: &[Rat]) -> IntVec {
    let l = v.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| (r * int_rat(&l)).to_integer()).collect();
    IntVec(ints).primitive()
}

/// Solves `Σ c_j · columns_j = target` exactly.
///
/// Returns `None` when the target is outside the column span. The columns
/// must be linearly independent, so any solution is unique.
pub fn solve_rational_system(columns: &[IntVec], target: &IntVec) -> Result<Option<RatVec>> {
    let n = target.dim();
    for c in columns {
        check_dim(n, c.dim())?;
    }
    if !is_independent(columns) {
        return Err(Error::input("columns are linearly dependent"));
    }
    let k = columns.len();
    let mut m: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = columns.iter().map(|c| int_rat(&c[i])).collect();
            row.push(int_rat(&target[i]));
            row
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&k) {
        return Ok(None);
    }
    let mut sol = vec![Rat::zero(); k];
    for (row, &p) in pivots.iter().enumerate() {
        sol[p] = m[row][k].clone();
    }
    Ok(Some(RatVec(sol)))
}

/// Subgroup of ℤⁿ in Hermite normal form.
///
/// Rows are in echelon form with positive pivots; entries above a pivot lie
/// in `[0, pivot)`. Pivoting rule: within a column the row with the smallest
/// absolute nonzero entry (lowest index on ties) becomes the pivot row and the
/// other rows are reduced against it until the column is cleared. The form is
/// unique for a given lattice, so two bases compare equal exactly when they
/// span the same subgroup.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct LatticeBasis {
    dim: usize,
    rows: Vec<IntVec>,
}

impl LatticeBasis {
    /// The zero subgroup of ℤⁿ.
    pub fn zero(dim: usize) -> Self {
        LatticeBasis { dim, rows: Vec::new() }
    }

    /// Like [`lattice_basis`] but accepts an empty generator list.
    pub fn from_generators(dim: usize, vectors: &[IntVec]) -> Result<Self> {
        for v in vectors {
            check_dim(dim, v.dim())?;
        }
        let mut rows: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.0.clone()).collect();
        let mut r = 0;
        for c in 0..dim {
            loop {
                let pivot = (r..rows.len())
                    .filter(|&i| !rows[i][c].is_zero())
                    .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()).then(i.cmp(&j)));
                let Some(p) = pivot else { break };
                rows.swap(r, p);
                let mut cleared = true;
                for i in (r + 1)..rows.len() {
                    if rows[i][c].is_zero() {
                        continue;
                    }
                    let q = rows[i][c].div_floor(&rows[r][c]);
                    let pivot = rows[r].clone();
                    for (x, p) in rows[i].iter_mut().zip(&pivot) {
                        *x -= p * &q;
                    }
                    if !rows[i][c].is_zero() {
                        cleared = false;
                    }
                }
                if cleared {
                    break;
                }
            }
            if r < rows.len() && !rows[r][c].is_zero() {
                if rows[r][c].is_negative() {
                    for x in rows[r].iter_mut() {
                        *x = -&*x;
                    }
                }
                for i in 0..r {
                    let q = rows[i][c].div_floor(&rows[r][c]);
                    if !q.is_zero() {
                        let pivot = rows[r].clone();
                        for (x, p) in rows[i].iter_mut().zip(&pivot) {
                            *x -= p * &q;
                        }
                    }
                }
                r += 1;
            }
        }
        rows.truncate(r);
        Ok(LatticeBasis { dim, rows: rows.into_iter().map(IntVec).collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[IntVec] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn pivot_col(row: &IntVec) -> usize {
        row.0.iter().position(|x| !x.is_zero()).expect("HNF rows are nonzero")
    }

    /// Index `[ℤⁿ : L]` for a full-rank lattice, `None` otherwise.
    pub fn index(&self) -> Option<BigInt> {
        (self.rank() == self.dim).then(|| self.rows.iter().map(|r| r[Self::pivot_col(r)].clone()).product())
    }

    /// Canonical representative of the coset `v + L`.
    pub fn reduce(&self, v: &IntVec) -> Result<IntVec> {
        check_dim(self.dim, v.dim())?;
        let mut v = v.clone();
        for row in &self.rows {
            let p = Self::pivot_col(row);
            let q = v.0[p].div_floor(&row.0[p]);
            if !q.is_zero() {
                v = &v - &row.scale(&q);
            }
        }
        Ok(v)
    }

    pub fn contains(&self, v: &IntVec) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }
}

/// Canonical basis of the subgroup of ℤⁿ generated by `vectors`.
pub fn lattice_basis(vectors: &[IntVec]) -> Result<LatticeBasis> {
    let dim = shared_dim(vectors)?;
    LatticeBasis::from_generators(dim, vectors)
}

/// Whether `v` is an integer combination of the rows of `lattice`.
pub fn lattice_member(v: &IntVec, lattice: &LatticeBasis) -> Result<bool> {
    lattice.contains(v)
}

/// ℤ-basis of `{t ∈ ℤᴺ : Σ_j t_j · columns_j = 0}`.
///
/// Computed from the Hermite form of the vectors `(columns_j, e_j)`: rows
/// whose leading part vanishes span exactly the integer relations.
pub fn integer_relations(columns: &[IntVec]) -> Result<LatticeBasis> {
    let m = shared_dim(columns)?;
    let n = columns.len();
    let augmented: Vec<IntVec> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut v = c.0.clone();
            v.extend((0..n).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            IntVec(v)
        })
        .collect();
    let hnf = LatticeBasis::from_generators(m + n, &augmented)?;
    let rows: Vec<IntVec> =
        hnf.rows.iter().filter(|r| r.0[..m].iter().all(Zero::is_zero)).map(|r| IntVec(r.0[m..].to_vec())).collect();
    LatticeBasis::from_generators(n, &rows)
}

/// Iterates over all integer points of `Π [0, bounds_j]` in lexicographic
/// order.
pub fn box_points(bounds: &[i64]) -> impl Iterator<Item = IntVec> + '_ {
    let n = bounds.len();
    let mut cur = vec![0i64; n];
    let mut done = bounds.iter().any(|&b| b < 0);
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = IntVec::from_i64s(&cur);
        // odometer, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if cur[i] < bounds[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    })
}
