//! Stratification of the atom set into layers of extremal atoms, the unique
//! layered representation it induces, and the inequality description of the
//! admissible coefficient tuples.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::arith::{
    box_points, graded_cmp, integer_kernel, is_independent, solve_rational_system, IntVec, LatticeBasis, Rat,
};
use crate::error::{check_dim, Error, Result};
use crate::extraction::{classify_among, coordinates};
use crate::hilbert::{apery, outside_ideal};
use crate::monoid::{box_bound_i64, Monoid};

/// Largest coefficient total explored when looking for a relation.
pub const RELATION_MAX_TOTAL: u32 = 12;
const RELATION_MAX_COMBOS: usize = 200_000;

/// Atom order inside a stratum: total degree ascending, ties broken by
/// descending lexicographic order.
pub fn stratum_order(a: &IntVec, b: &IntVec) -> std::cmp::Ordering {
    a.degree().cmp(&b.degree()).then_with(|| b.cmp(a))
}

/// `Σ left_q q = Σ right_q q` with disjoint supports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub atoms: Vec<IntVec>,
    pub left: Vec<BigInt>,
    pub right: Vec<BigInt>,
    pub value: IntVec,
}

impl Relation {
    fn side(&self, coeffs: &[BigInt]) -> Vec<(IntVec, BigInt)> {
        self.atoms.iter().zip(coeffs).filter(|(_, c)| !c.is_zero()).map(|(a, c)| (a.clone(), c.clone())).collect()
    }

    pub fn left_terms(&self) -> Vec<(IntVec, BigInt)> {
        self.side(&self.left)
    }

    pub fn right_terms(&self) -> Vec<(IntVec, BigInt)> {
        self.side(&self.right)
    }
}

fn fmt_side(terms: &[(IntVec, BigInt)]) -> String {
    terms.iter().map(|(a, c)| if c.is_one() { a.to_string() } else { format!("{c}{a}") }).collect::<Vec<_>>().join("+")
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", fmt_side(&self.left_terms()), fmt_side(&self.right_terms()))
    }
}

#[derive(Serialize)]
struct Term {
    atom: IntVec,
    #[serde(serialize_with = "crate::arith::serialize_int")]
    coeff: BigInt,
}

fn terms_json(terms: Vec<(IntVec, BigInt)>) -> Vec<Term> {
    terms.into_iter().map(|(atom, coeff)| Term { atom, coeff }).collect()
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Relation", 4)?;
        st.serialize_field("left", &terms_json(self.left_terms()))?;
        st.serialize_field("right", &terms_json(self.right_terms()))?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

fn combination(atoms: &[IntVec], coeffs: &[BigInt]) -> IntVec {
    let dim = atoms.first().map_or(0, IntVec::dim);
    atoms.iter().zip(coeffs).fold(IntVec::zeros(dim), |acc, (a, c)| &acc + &a.scale(c))
}

/// A relation among `atoms` of smallest coefficient total, or `None` when
/// they are linearly independent.
///
/// Combinations are enumerated by increasing total up to
/// [`RELATION_MAX_TOTAL`]; the first two with equal value give the relation.
/// If that search is exhausted a rational kernel vector is split into its
/// positive and negative parts instead.
pub fn find_relation(atoms: &[IntVec]) -> Option<Relation> {
    if atoms.is_empty() || is_independent(atoms) {
        return None;
    }
    let k = atoms.len();
    let mut seen: HashMap<IntVec, Vec<u32>> = HashMap::new();
    let mut count = 0usize;
    let mut found = None;
    'outer: for total in 1..=RELATION_MAX_TOTAL {
        let mut current = vec![0u32; k];
        let mut stop = false;
        compositions(total, 0, &mut current, &mut |c| {
            if stop {
                return;
            }
            count += 1;
            let coeffs: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            let value = combination(atoms, &coeffs);
            match seen.get(&value) {
                Some(prev) => {
                    found = Some((prev.clone(), c.to_vec(), value));
                    stop = true;
                }
                None => {
                    seen.insert(value, c.to_vec());
                }
            }
            if count > RELATION_MAX_COMBOS {
                stop = true;
            }
        });
        if found.is_some() || count > RELATION_MAX_COMBOS {
            break 'outer;
        }
    }
    let (left, right) = match found {
        Some((earlier, later, _)) => {
            let l: Vec<BigInt> = later.iter().map(|&x| BigInt::from(x)).collect();
            let r: Vec<BigInt> = earlier.iter().map(|&x| BigInt::from(x)).collect();
            (l, r)
        }
        None => {
            let v = integer_kernel(atoms).into_iter().next()?;
            let l = v.entries().iter().map(|x| if x.is_positive() { x.clone() } else { BigInt::zero() }).collect();
            let r = v.entries().iter().map(|x| if x.is_negative() { -x } else { BigInt::zero() }).collect();
            (l, r)
        }
    };
    // cancel the common part
    let (left, right): (Vec<BigInt>, Vec<BigInt>) = left
        .iter()
        .zip(&right)
        .map(|(l, r)| {
            let m = l.min(r).clone();
            (l - &m, r - &m)
        })
        .unzip();
    let value = combination(atoms, &left);
    Some(Relation { atoms: atoms.to_vec(), left, right, value })
}

/// Calls `f` on every vector of `current.len()` nonnegative entries summing
/// to `total`, in lexicographically decreasing order.
fn compositions(total: u32, pos: usize, current: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    let k = current.len();
    if pos + 1 == k {
        current[pos] = total;
        f(current);
        current[pos] = 0;
        return;
    }
    for x in (0..=total).rev() {
        current[pos] = x;
        compositions(total - x, pos + 1, current, f);
    }
    current[pos] = 0;
}

/// Why a stage could not be certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FailureWitness {
    /// The stage's atoms are linearly dependent, so they do not generate a
    /// factorial monoid.
    Relation { relation: Relation },
    /// A remaining atom lies outside the cone of the stage's atoms.
    NotBase { atom: IntVec },
    /// Two distinct Apéry elements differ by an element of the group of the
    /// stage's atoms.
    NotCoprime { w: IntVec, w_prime: IntVec, difference: IntVec },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub atoms: Vec<IntVec>,
    pub independent: bool,
    pub base_certified: bool,
    pub coprime_certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    Complete,
    Failed { stage: usize, witness: FailureWitness },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratification {
    pub strata: Vec<Stratum>,
    pub status: Status,
    /// Atoms not assigned to any stratum (empty when complete).
    pub remaining: Vec<IntVec>,
}

impl Stratification {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, Status::Complete)
    }

    pub fn layers(&self) -> Vec<Vec<IntVec>> {
        self.strata.iter().map(|s| s.atoms.clone()).collect()
    }
}

/// The atoms spanning the extremal rays of `cone(atoms)`, the smallest one on
/// each ray, in stratum order.
pub fn extremal_layer(atoms: &[IntVec]) -> Result<Vec<IntVec>> {
    let mut layer: Vec<IntVec> = Vec::new();
    let mut sorted = atoms.to_vec();
    sorted.sort_by(graded_cmp);
    for a in &sorted {
        if !classify_among(atoms, a)?.extremal {
            continue;
        }
        if layer.iter().any(|b| crate::arith::rank(&[a.clone(), b.clone()]) == 1) {
            continue;
        }
        layer.push(a.clone());
    }
    layer.sort_by(stratum_order);
    Ok(layer)
}

/// Peels extremal layers off the atom set without certifying anything.
pub fn strong_layers(m: &Monoid) -> Result<Vec<Vec<IntVec>>> {
    let mut rest = m.hilbert_basis()?.to_vec();
    let mut layers = Vec::new();
    while !rest.is_empty() {
        let layer = extremal_layer(&rest)?;
        rest.retain(|a| !layer.contains(a));
        layers.push(layer);
    }
    Ok(layers)
}

/// Outcome of the coprimality check on one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoprimeReport {
    pub holds: bool,
    /// Whether the Apéry set examined was complete.
    pub complete: bool,
    pub apery_size: usize,
    pub witness: Option<FailureWitness>,
}

/// Checks that no two distinct elements of `Ap(M, base)` differ by an
/// element of the group generated by `base`.
pub fn check_coprime(m: &Monoid, base: &[IntVec], box_bound: u64) -> Result<CoprimeReport> {
    let ap = apery(m, base, box_bound)?;
    let lattice = LatticeBasis::from_generators(m.dim(), base)?;
    let mut classes: HashMap<IntVec, IntVec> = HashMap::new();
    for w in &ap.elements {
        let key = lattice.reduce(w)?;
        if let Some(prev) = classes.get(&key) {
            let witness = FailureWitness::NotCoprime { w: w.clone(), w_prime: prev.clone(), difference: w - prev };
            return Ok(CoprimeReport {
                holds: false,
                complete: ap.complete,
                apery_size: ap.elements.len(),
                witness: Some(witness),
            });
        }
        classes.insert(key, w.clone());
    }
    Ok(CoprimeReport { holds: true, complete: ap.complete, apery_size: ap.elements.len(), witness: None })
}

/// Box used for Apéry enumeration when a stage's Apéry set is not provably
/// finite.
pub const STAGE_BOX: u64 = 40;

/// Builds the stratification stage by stage.
///
/// Each stage takes the extremal layer of the remaining atoms and certifies
/// that it is independent, that its cone contains the remaining atoms, and
/// that distinct Apéry elements of the remaining monoid with respect to it
/// lie in distinct cosets of its group. The first stage that fails stops the
/// process.
pub fn stratify(m: &Monoid) -> Result<Stratification> {
    let mut rest = m.hilbert_basis()?.to_vec();
    let mut strata = Vec::new();
    let mut stage = 0;
    while !rest.is_empty() {
        stage += 1;
        let layer = extremal_layer(&rest)?;
        let mut stratum =
            Stratum { atoms: layer.clone(), independent: false, base_certified: false, coprime_certified: false };
        let fail = |stratum: Stratum, strata: &mut Vec<Stratum>, rest: Vec<IntVec>, witness| {
            strata.push(stratum);
            Ok(Stratification {
                strata: std::mem::take(strata),
                status: Status::Failed { stage, witness },
                remaining: rest,
            })
        };

        if let Some(relation) = find_relation(&layer) {
            log::info!("stage {stage}: dependent layer, {relation}");
            return fail(stratum, &mut strata, rest, FailureWitness::Relation { relation });
        }
        stratum.independent = true;

        for a in &rest {
            let inside =
                matches!(solve_rational_system(&layer, a)?, Some(c) if c.entries().iter().all(|r| !r.is_negative()));
            if !inside {
                return fail(stratum, &mut strata, rest.clone(), FailureWitness::NotBase { atom: a.clone() });
            }
        }
        stratum.base_certified = true;

        let sub = if stage == 1 { m.clone() } else { Monoid::from_generators(rest.clone())? };
        let report = check_coprime(&sub, &layer, STAGE_BOX)?;
        if !report.complete {
            return Err(Error::internal("Apéry set of a certified base should be finite"));
        }
        if let Some(witness) = report.witness {
            return fail(stratum, &mut strata, rest, witness);
        }
        stratum.coprime_certified = true;
        log::debug!("stage {stage}: {} atoms, Apéry size {}", layer.len(), report.apery_size);

        rest.retain(|a| !layer.contains(a));
        strata.push(stratum);
    }
    Ok(Stratification { strata, status: Status::Complete, remaining: Vec::new() })
}

/// Layered representation: one coefficient per atom of each stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub strata: Vec<Vec<BigInt>>,
    pub value: IntVec,
}

impl Representation {
    pub fn reconstruct(&self, layers: &[Vec<IntVec>]) -> IntVec {
        layers
            .iter()
            .zip(&self.strata)
            .fold(IntVec::zeros(self.value.dim()), |acc, (atoms, c)| &acc + &combination(atoms, c))
    }
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strata: Vec<IntVec> = self.strata.iter().map(|c| IntVec::new(c.clone())).collect();
        let mut st = s.serialize_struct("Representation", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("strata", &strata)?;
        st.end()
    }
}

/// Whether `y ∈ Ap(M, prefix)`.
fn in_apery(m: &Monoid, prefix: &[IntVec], y: &IntVec) -> Result<bool> {
    Ok(y.is_nonnegative() && m.contains(y)? && outside_ideal(m, prefix, y)?)
}

/// Decomposes elements along a complete stratification.
pub struct Decomposer<'a> {
    monoid: &'a Monoid,
    layers: Vec<Vec<IntVec>>,
    prefixes: Vec<Vec<IntVec>>,
}

impl<'a> Decomposer<'a> {
    pub fn new(m: &'a Monoid, s: &Stratification) -> Result<Self> {
        if !s.is_complete() {
            return Err(Error::input("decomposition needs a complete stratification"));
        }
        let layers = s.layers();
        let mut prefixes = Vec::new();
        let mut acc = Vec::new();
        for l in &layers {
            acc.extend(l.iter().cloned());
            prefixes.push(acc.clone());
        }
        Ok(Decomposer { monoid: m, layers, prefixes })
    }

    pub fn layers(&self) -> &[Vec<IntVec>] {
        &self.layers
    }

    fn acceptable(&self, stage: usize, rest: &IntVec) -> Result<bool> {
        if stage + 1 == self.layers.len() {
            Ok(rest.is_zero())
        } else {
            in_apery(self.monoid, &self.prefixes[stage], rest)
        }
    }

    /// Peels stage after stage: the coefficients are the floors of the
    /// coordinates of the running remainder, falling back to a search below
    /// them if the remainder is not an Apéry element.
    pub fn decompose(&self, x: &IntVec) -> Result<Representation> {
        check_dim(self.monoid.dim(), x.dim())?;
        if !self.monoid.contains(x)? {
            return Err(Error::input(format!("{x} is not in the monoid")));
        }
        let mut rest = x.clone();
        let mut strata = Vec::with_capacity(self.layers.len());
        for (stage, layer) in self.layers.iter().enumerate() {
            let coords = coordinates(&rest, layer)
                .map_err(|e| Error::internal(format!("remainder {rest} outside stage {}: {e}", stage + 1)))?;
            let floor = coords.floor();
            let mut chosen = None;
            let next = &rest - &combination(layer, &floor);
            if self.acceptable(stage, &next)? {
                chosen = Some(floor.clone());
            } else {
                for lam in below(&floor) {
                    let next = &rest - &combination(layer, &lam);
                    if self.acceptable(stage, &next)? {
                        chosen = Some(lam);
                        break;
                    }
                }
            }
            let lam = chosen.ok_or_else(|| {
                Error::internal(format!("no admissible coefficients at stage {} for {rest}", stage + 1))
            })?;
            rest = &rest - &combination(layer, &lam);
            strata.push(lam);
        }
        if !rest.is_zero() {
            return Err(Error::internal(format!("nonzero remainder {rest} after the last stage")));
        }
        let rep = Representation { strata, value: x.clone() };
        self.verify(&rep)?;
        Ok(rep)
    }

    /// Re-checks every tail condition of a representation.
    pub fn verify(&self, rep: &Representation) -> Result<()> {
        if rep.reconstruct(&self.layers) != rep.value {
            return Err(Error::internal("representation does not reconstruct its value"));
        }
        for i in 1..self.layers.len() {
            let tail = self.layers[i..]
                .iter()
                .zip(&rep.strata[i..])
                .fold(IntVec::zeros(rep.value.dim()), |acc, (l, c)| &acc + &combination(l, c));
            if !in_apery(self.monoid, &self.prefixes[i - 1], &tail)? {
                return Err(Error::internal(format!("tail {tail} from stage {} is not an Apéry element", i + 1)));
            }
        }
        Ok(())
    }
}

/// All coefficient vectors `0 ≤ λ ≤ top` other than `top`, by decreasing
/// total.
fn below(top: &[BigInt]) -> Vec<Vec<BigInt>> {
    let bounds: Vec<i64> = top.iter().map(|b| b.to_i64().unwrap_or(i64::MAX)).collect();
    let mut all: Vec<IntVec> = box_points(&bounds).collect();
    all.pop();
    all.sort_by(|a, b| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
    all.into_iter().map(IntVec::into_entries).collect()
}

pub fn decompose(m: &Monoid, s: &Stratification, x: &IntVec) -> Result<Representation> {
    Decomposer::new(m, s)?.decompose(x)
}

/// `Σ coeffs_s · s < bound` over named nonnegative integer symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inequality {
    /// One coefficient per symbol, in symbol order.
    pub coeffs: Vec<BigInt>,
    pub bound: BigInt,
}

impl Inequality {
    /// Divides by the content and rounds the bound accordingly. Returns
    /// `Ok(true)`/`Ok(false)` for constant inequalities.
    fn normalize(self) -> std::result::Result<Inequality, bool> {
        let g = self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() {
            return Err(self.bound.is_positive());
        }
        let coeffs = self.coeffs.iter().map(|c| c / &g).collect();
        // Σ c s ≤ b − 1  ⇔  Σ (c/g) s ≤ ⌊(b − 1)/g⌋
        let bound: BigInt = (&self.bound - BigInt::one()).div_floor(&g) + 1;
        if !bound.is_positive() {
            return Err(false);
        }
        Ok(Inequality { coeffs, bound })
    }

    pub fn holds(&self, values: &[BigInt]) -> bool {
        self.lhs(values) < self.bound
    }

    fn lhs(&self, values: &[BigInt]) -> BigInt {
        self.coeffs.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Sufficient test that every nonnegative integer solution of `self`
    /// solves `other`.
    fn implies(&self, other: &Inequality) -> bool {
        let mut t: Option<Rat> = None;
        for (c1, c2) in self.coeffs.iter().zip(&other.coeffs) {
            if c2.is_positive() {
                if !c1.is_positive() {
                    return false;
                }
                let r = Rat::new(c1.clone(), c2.clone());
                t = Some(match t {
                    Some(old) if old < r => old,
                    _ => r,
                });
            }
        }
        let Some(t) = t else { return true };
        // other.lhs ≤ self.lhs / t ≤ (b1 − 1)/t
        let max = (Rat::from_integer(&self.bound - 1) / t).floor().to_integer();
        max < other.bound
    }
}

/// A disjunction of inequalities; at least one must hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub any_of: Vec<Inequality>,
    pub stage: usize,
}

impl Clause {
    pub fn holds(&self, values: &[BigInt]) -> bool {
        self.any_of.iter().any(|i| i.holds(values))
    }

    fn implies(&self, other: &Clause) -> bool {
        self.any_of.iter().all(|d| other.any_of.iter().any(|e| d.implies(e)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Symbol {
    pub name: String,
    pub atom: IntVec,
    pub stratum: usize,
}

/// Coefficient tuples `(λ_s)` over the atoms of a stratification, restricted
/// by linear constraints, that correspond one-to-one to monoid elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parametrization {
    pub symbols: Vec<Symbol>,
    pub constraints: Vec<Clause>,
}

impl Parametrization {
    pub fn free_symbols(&self) -> Vec<&Symbol> {
        let used: Vec<bool> = (0..self.symbols.len())
            .map(|i| self.constraints.iter().any(|c| c.any_of.iter().any(|d| !d.coeffs[i].is_zero())))
            .collect();
        self.symbols.iter().zip(used).filter(|(_, u)| !u).map(|(s, _)| s).collect()
    }

    pub fn admissible(&self, values: &[BigInt]) -> bool {
        self.constraints.iter().all(|c| c.holds(values))
    }

    pub fn value(&self, values: &[BigInt]) -> IntVec {
        let atoms: Vec<IntVec> = self.symbols.iter().map(|s| s.atom.clone()).collect();
        combination(&atoms, values)
    }

    /// Renders an inequality as `a+5b+3c<7`.
    pub fn render(&self, ineq: &Inequality) -> String {
        let mut out = String::new();
        for (s, c) in self.symbols.iter().zip(&ineq.coeffs) {
            if c.is_zero() {
                continue;
            }
            if !out.is_empty() {
                out.push('+');
            }
            if !c.is_one() {
                out.push_str(&c.to_string());
            }
            out.push_str(&s.name);
        }
        format!("{out}<{}", ineq.bound)
    }

    pub fn render_clause(&self, clause: &Clause) -> String {
        clause.any_of.iter().map(|d| self.render(d)).collect::<Vec<_>>().join(" or ")
    }
}

struct IneqJson<'a> {
    p: &'a Parametrization,
    ineq: &'a Inequality,
}

struct CoeffMap<'a>(&'a Parametrization, &'a Inequality);

impl Serialize for CoeffMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nonzero: Vec<_> = self.0.symbols.iter().zip(&self.1.coeffs).filter(|(_, c)| !c.is_zero()).collect();
        let mut map = s.serialize_map(Some(nonzero.len()))?;
        for (sym, c) in nonzero {
            map.serialize_entry(&sym.name, &crate::arith::JsonInt(c.clone()))?;
        }
        map.end()
    }
}

impl Serialize for IneqJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Inequality", 4)?;
        st.serialize_field("coeffs", &CoeffMap(self.p, self.ineq))?;
        st.serialize_field("strict_lt", &crate::arith::JsonInt(self.ineq.bound.clone()))?;
        st.serialize_field("le", &crate::arith::JsonInt(&self.ineq.bound - 1))?;
        st.serialize_field("text", &self.p.render(self.ineq))?;
        st.end()
    }
}

struct ClauseJson<'a> {
    p: &'a Parametrization,
    clause: &'a Clause,
}

impl Serialize for ClauseJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if let [single] = self.clause.any_of.as_slice() {
            return IneqJson { p: self.p, ineq: single }.serialize(s);
        }
        let parts: Vec<IneqJson> = self.clause.any_of.iter().map(|ineq| IneqJson { p: self.p, ineq }).collect();
        let mut st = s.serialize_struct("Clause", 2)?;
        st.serialize_field("any_of", &parts)?;
        st.serialize_field("text", &self.p.render_clause(self.clause))?;
        st.end()
    }
}

impl Serialize for Parametrization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let constraints: Vec<ClauseJson> =
            self.constraints.iter().map(|clause| ClauseJson { p: self, clause }).collect();
        let free: Vec<&str> = self.free_symbols().iter().map(|s| s.name.as_str()).collect();
        let mut st = s.serialize_struct("Parametrization", 3)?;
        st.serialize_field("symbols", &self.symbols)?;
        st.serialize_field("constraints", &constraints)?;
        st.serialize_field("free", &free)?;
        st.end()
    }
}

fn symbol_names(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (1..=n).map(|i| format!("s{i}")).collect()
    }
}

/// Inequality description of the layered representations of a full monoid.
///
/// For every stage `i ≥ 2` and every atom `a` of an earlier stage the tail
/// from stage `i` on must avoid `a + M`. In a full monoid that happens iff
/// some facet normal `v` with `v(a) > 0` has `v(tail) < v(a)`, giving one
/// disjunctive clause. Clauses are normalized, disjuncts implying another
/// disjunct of the same clause are dropped, and clauses implied by another
/// clause are dropped.
///
/// Symbols are named `a, b, c, …`: constrained strata first in stratum
/// order, the first stratum last.
pub fn parametrize(m: &Monoid, s: &Stratification) -> Result<Parametrization> {
    if !m.is_full() {
        return Err(Error::unsupported("parametrization is only available for full monoids"));
    }
    if !s.is_complete() {
        return Err(Error::input("parametrization needs a complete stratification"));
    }
    let facets = m.facets()?.normals().to_vec();
    let layers = s.layers();

    // symbol order: strata 2..k, then stratum 1
    let mut order: Vec<(usize, IntVec)> = Vec::new();
    for (i, l) in layers.iter().enumerate().skip(1) {
        order.extend(l.iter().map(|a| (i + 1, a.clone())));
    }
    order.extend(layers[0].iter().map(|a| (1, a.clone())));
    let names = symbol_names(order.len());
    let symbols: Vec<Symbol> =
        order.into_iter().zip(names).map(|((stratum, atom), name)| Symbol { name, atom, stratum }).collect();

    let mut clauses: Vec<Clause> = Vec::new();
    for stage in 2..=layers.len() {
        for earlier in &layers[..stage - 1] {
            for a in earlier {
                let mut any_of = Vec::new();
                let mut tautology = false;
                for v in &facets {
                    let va = v.dot(a);
                    if !va.is_positive() {
                        continue;
                    }
                    let coeffs: Vec<BigInt> = symbols
                        .iter()
                        .map(|sym| if sym.stratum >= stage { v.dot(&sym.atom) } else { BigInt::zero() })
                        .collect();
                    match (Inequality { coeffs, bound: va }).normalize() {
                        Ok(i) => any_of.push(i),
                        Err(true) => tautology = true,
                        Err(false) => {}
                    }
                }
                if tautology {
                    continue;
                }
                if any_of.is_empty() {
                    return Err(Error::internal(format!("unsatisfiable clause for {a} at stage {stage}")));
                }
                clauses.push(Clause { any_of: simplify_disjuncts(any_of), stage });
            }
        }
    }
    Ok(Parametrization { symbols, constraints: drop_implied(clauses) })
}

fn simplify_disjuncts(mut d: Vec<Inequality>) -> Vec<Inequality> {
    let mut seen = Vec::new();
    d.retain(|x| {
        if seen.contains(x) {
            false
        } else {
            seen.push(x.clone());
            true
        }
    });
    let keep: Vec<bool> = (0..d.len())
        .map(|i| !(0..d.len()).any(|j| j != i && d[i].implies(&d[j]) && (!d[j].implies(&d[i]) || j < i)))
        .collect();
    d.into_iter().zip(keep).filter(|(_, k)| *k).map(|(x, _)| x).collect()
}

fn drop_implied(clauses: Vec<Clause>) -> Vec<Clause> {
    let mut kept: Vec<Clause> = Vec::new();
    let n = clauses.len();
    let mut alive = vec![true; n];
    for j in 0..n {
        for i in 0..n {
            if i == j || !alive[i] {
                continue;
            }
            let ij = clauses[i].implies(&clauses[j]);
            if ij && (!clauses[j].implies(&clauses[i]) || i < j) {
                alive[j] = false;
                break;
            }
        }
    }
    for (c, a) in clauses.into_iter().zip(alive) {
        if a {
            kept.push(c);
        }
    }
    kept
}

/// Result of comparing admissible tuples with monoid elements on a box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    pub bijective: bool,
    pub box_bound: u64,
    pub elements: usize,
    pub tuples: usize,
    /// Monoid elements in the box that no admissible tuple reaches.
    pub missing: Vec<IntVec>,
    /// Values reached by more than one admissible tuple.
    pub duplicates: Vec<Duplicate>,
    /// Values of admissible tuples that are not monoid elements.
    pub extraneous: Vec<IntVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Duplicate {
    pub value: IntVec,
    pub tuples: Vec<IntVec>,
}

const REPORT_LIMIT: usize = 20;

/// Enumerates every admissible tuple whose value lies in `[0, box_bound]ⁿ`
/// and compares the values with the monoid elements of that box.
pub fn verify_bijection(m: &Monoid, p: &Parametrization, box_bound: u64) -> Result<BijectionReport> {
    let b = box_bound_i64(box_bound)?;
    let n = m.dim();
    for s in &p.symbols {
        check_dim(n, s.atom.dim())?;
        if s.atom.is_zero() || !s.atom.is_nonnegative() {
            return Err(Error::input("symbol atoms must be nonzero and nonnegative"));
        }
    }
    let limit = IntVec::new(vec![BigInt::from(b); n]);
    let mut hits: BTreeMap<IntVec, Vec<IntVec>> = BTreeMap::new();
    let mut values = vec![BigInt::zero(); p.symbols.len()];
    let mut tuples = 0usize;
    enumerate_tuples(p, 0, &mut values, IntVec::zeros(n), &limit, &mut |vals, value| {
        tuples += 1;
        hits.entry(value.clone()).or_default().push(IntVec::new(vals.to_vec()));
    });

    let mut elements = 0usize;
    let mut missing = Vec::new();
    for x in box_points(&vec![b; n]) {
        if m.contains(&x)? {
            elements += 1;
            if !hits.contains_key(&x) {
                missing.push(x);
            }
        }
    }
    let mut extraneous = Vec::new();
    let mut duplicates = Vec::new();
    for (value, ts) in &hits {
        if !m.contains(value)? {
            extraneous.push(value.clone());
        }
        if ts.len() > 1 {
            duplicates.push(Duplicate { value: value.clone(), tuples: ts.clone() });
        }
    }
    let bijective = missing.is_empty() && duplicates.is_empty() && extraneous.is_empty();
    for list in [&mut missing, &mut extraneous] {
        list.sort_by(graded_cmp);
        list.truncate(REPORT_LIMIT);
    }
    duplicates.sort_by(|a, b| graded_cmp(&a.value, &b.value));
    duplicates.truncate(REPORT_LIMIT);
    Ok(BijectionReport { bijective, box_bound, elements, tuples, missing, duplicates, extraneous })
}

/// Depth-first enumeration with two prunings: the running value must stay in
/// the box, and a clause whose disjuncts are all already violated cannot
/// recover since coefficients are nonnegative.
fn enumerate_tuples(
    p: &Parametrization,
    pos: usize,
    values: &mut Vec<BigInt>,
    partial: IntVec,
    limit: &IntVec,
    f: &mut impl FnMut(&[BigInt], &IntVec),
) {
    if pos == values.len() {
        if p.admissible(values) {
            f(values, &partial);
        }
        return;
    }
    let atom = p.symbols[pos].atom.clone();
    let mut current = partial;
    let mut k = BigInt::zero();
    loop {
        if !current.le(limit) {
            break;
        }
        values[pos] = k.clone();
        if p.constraints.iter().all(|c| c.any_of.iter().any(|d| d.lhs(values) < d.bound)) {
            enumerate_tuples(p, pos + 1, values, current.clone(), limit, f);
        } else {
            break;
        }
        current = &current + &atom;
        k += 1;
    }
    values[pos] = BigInt::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivec;
    use crate::monoid::elliott_monoid;

    fn mod7() -> Monoid {
        elliott_monoid(1, 2, 7).unwrap().0
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn mod7_strata() {
        let m = mod7();
        let s = stratify(&m).unwrap();
        assert!(s.is_complete());
        assert_eq!(s.layers(), vec![vec![ivec![7, 0], ivec![0, 7]], vec![ivec![1, 3], ivec![5, 1]], vec![ivec![3, 2]]]);
        for st in &s.strata {
            assert!(st.independent && st.base_certified && st.coprime_certified);
        }
    }

    #[test]
    fn factorial_single_stratum() {
        let m = Monoid::from_generators(vec![ivec![1, 0], ivec![0, 1]]).unwrap();
        let s = stratify(&m).unwrap();
        assert!(s.is_complete());
        assert_eq!(s.layers(), vec![vec![ivec![1, 0], ivec![0, 1]]]);
    }

    #[test]
    fn numerical_semigroup_singletons() {
        let m = Monoid::from_generators(vec![ivec![3], ivec![5], ivec![7]]).unwrap();
        let s = stratify(&m).unwrap();
        assert!(s.is_complete());
        assert_eq!(s.layers(), vec![vec![ivec![3]], vec![ivec![5]], vec![ivec![7]]]);
    }

    #[test]
    fn decompositions() {
        let m = mod7();
        let s = stratify(&m).unwrap();
        let d = Decomposer::new(&m, &s).unwrap();
        let r = d.decompose(&ivec![6, 4]).unwrap();
        assert_eq!(r.strata, vec![ints(&[0, 0]), ints(&[1, 1]), ints(&[0])]);
        let r = d.decompose(&ivec![13, 11]).unwrap();
        assert_eq!(r.strata, vec![ints(&[1, 1]), ints(&[1, 1]), ints(&[0])]);
        let r = d.decompose(&ivec![0, 0]).unwrap();
        assert_eq!(r.strata, vec![ints(&[0, 0]), ints(&[0, 0]), ints(&[0])]);
        assert!(d.decompose(&ivec![1, 1]).is_err());
    }

    #[test]
    fn mod7_parametrization() {
        let m = mod7();
        let s = stratify(&m).unwrap();
        let p = parametrize(&m, &s).unwrap();
        let names: Vec<(&str, IntVec)> = p.symbols.iter().map(|s| (s.name.as_str(), s.atom.clone())).collect();
        assert_eq!(
            names,
            vec![("a", ivec![1, 3]), ("b", ivec![5, 1]), ("c", ivec![3, 2]), ("d", ivec![7, 0]), ("e", ivec![0, 7])]
        );
        let text: Vec<String> = p.constraints.iter().map(|c| p.render_clause(c)).collect();
        assert_eq!(text, vec!["a+5b+3c<7", "3a+b+2c<7", "c<2"]);
        let free: Vec<&str> = p.free_symbols().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(free, vec!["d", "e"]);

        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["constraints"][0]["coeffs"]["b"], 5);
        assert_eq!(json["constraints"][0]["strict_lt"], 7);
        assert_eq!(json["constraints"][0]["le"], 6);
    }

    #[test]
    fn bijection_and_corruption() {
        let m = mod7();
        let s = stratify(&m).unwrap();
        let p = parametrize(&m, &s).unwrap();
        let r = verify_bijection(&m, &p, 30).unwrap();
        assert!(r.bijective, "{r:?}");

        let mut broken = p.clone();
        broken.constraints.retain(|c| p.render_clause(c) != "c<2");
        let r = verify_bijection(&m, &broken, 30).unwrap();
        assert!(!r.bijective);
        assert_eq!(r.duplicates[0].value, ivec![6, 4]);
        assert_eq!(r.duplicates[0].tuples.len(), 2);
    }

    #[test]
    fn parametrize_rejects_generated() {
        let m = Monoid::from_generators(vec![ivec![1, 0], ivec![0, 1]]).unwrap();
        let s = stratify(&m).unwrap();
        assert!(matches!(parametrize(&m, &s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn factorial_parametrization_is_free() {
        let m = Monoid::from_congruences(2, &[]).unwrap();
        let s = stratify(&m).unwrap();
        let p = parametrize(&m, &s).unwrap();
        assert!(p.constraints.is_empty());
        assert_eq!(p.free_symbols().len(), 2);
        assert!(verify_bijection(&m, &p, 20).unwrap().bijective);
    }

    #[test]
    fn relation_search() {
        let atoms = [ivec![1, 0], ivec![0, 1], ivec![1, 1]];
        let r = find_relation(&atoms).unwrap();
        assert_eq!(combination(&atoms, &r.left), combination(&atoms, &r.right));
        assert_eq!(r.value, ivec![1, 1]);
        assert!(find_relation(&[ivec![1, 0], ivec![0, 1]]).is_none());
    }

    #[test]
    fn coprime_examples() {
        let m = mod7();
        let r = check_coprime(&m, &[ivec![7, 0], ivec![0, 7]], 40).unwrap();
        assert!(r.holds && r.complete);
        assert_eq!(r.apery_size, 7);
        let r = check_coprime(&m, &[ivec![7, 0]], 20).unwrap();
        assert!(!r.complete);
        let single = Monoid::from_generators(vec![ivec![3, 2]]).unwrap();
        assert!(check_coprime(&single, &[ivec![3, 2]], 10).unwrap().holds);
    }

    fn mod11() -> Monoid {
        Monoid::from_congruences(3, &[(ivec![4, 5, 8], 11)]).unwrap()
    }

    fn set(v: &[IntVec]) -> std::collections::BTreeSet<IntVec> {
        v.iter().cloned().collect()
    }

    #[test]
    fn mod11_layers() {
        let m = mod11();
        let layers = strong_layers(&m).unwrap();
        let expect = [
            vec![ivec![0, 0, 11], ivec![0, 11, 0], ivec![11, 0, 0]],
            vec![ivec![0, 1, 9], ivec![0, 5, 1], ivec![1, 0, 5], ivec![9, 0, 1], ivec![1, 8, 0], ivec![7, 1, 0]],
            vec![ivec![0, 2, 7], ivec![0, 4, 3], ivec![7, 0, 2], ivec![3, 0, 4], ivec![3, 2, 0], ivec![2, 5, 0]],
            vec![ivec![0, 3, 5], ivec![5, 0, 3], ivec![5, 1, 1], ivec![1, 1, 3], ivec![1, 2, 1]],
            vec![ivec![3, 1, 2]],
        ];
        assert_eq!(layers.len(), expect.len());
        for (l, e) in layers.iter().zip(&expect) {
            assert_eq!(set(l), set(e));
        }
        let r = find_relation(&layers[3]).unwrap();
        let mut sides = [
            set(&r.left_terms().into_iter().map(|t| t.0).collect::<Vec<_>>()),
            set(&r.right_terms().into_iter().map(|t| t.0).collect::<Vec<_>>()),
        ];
        sides.sort();
        let mut want = [set(&[ivec![5, 1, 1], ivec![1, 1, 3]]), set(&[ivec![5, 0, 3], ivec![1, 2, 1]])];
        want.sort();
        assert_eq!(sides, want);
        assert_eq!(r.value, ivec![6, 2, 4]);
    }

    #[test]
    fn mod11_stratification_stops_at_dependent_layer() {
        let s = stratify(&mod11()).unwrap();
        assert_eq!(s.strata.len(), 2);
        assert!(s.strata[0].coprime_certified);
        assert!(!s.strata[1].independent);
        match &s.status {
            Status::Failed { stage: 2, witness: FailureWitness::Relation { relation } } => {
                let atoms: Vec<IntVec> = relation.atoms.clone();
                assert_eq!(combination(&atoms, &relation.left), combination(&atoms, &relation.right));
            }
            other => panic!("unexpected status {other:?}"),
        }
    }

    #[test]
    fn mod11_last_layer_not_coprime() {
        let m = mod11();
        let layers = strong_layers(&m).unwrap();
        let mut gens = layers[3].clone();
        gens.extend(layers[4].iter().cloned());
        let sub = Monoid::from_generators(gens).unwrap();
        // (3,1,2) has two expressions over H₄, so two Apéry elements share a coset
        let r = check_coprime(&sub, &layers[3], 20).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn inequality_normalization() {
        let i = Inequality { coeffs: ints(&[3]), bound: BigInt::from(7) }.normalize().unwrap();
        assert_eq!(i, Inequality { coeffs: ints(&[1]), bound: BigInt::from(3) });
        let i = Inequality { coeffs: ints(&[2]), bound: BigInt::from(3) }.normalize().unwrap();
        assert_eq!(i.bound, BigInt::from(2));
        assert_eq!(Inequality { coeffs: ints(&[0]), bound: BigInt::from(3) }.normalize(), Err(true));
        let a = Inequality { coeffs: ints(&[1]), bound: BigInt::from(2) };
        let b = Inequality { coeffs: ints(&[1]), bound: BigInt::from(3) };
        assert!(a.implies(&b));
        assert!(!b.implies(&a));
    }

    mod props {
        use super::*;
        use crate::arith::lattice_member;
        use crate::extraction::{coset_order, in_diamond};
        use proptest::prelude::*;

        fn plane() -> impl Strategy<Value = Monoid> {
            (2u64..=11, 0i64..11, 0i64..11)
                .prop_map(|(d, a, b)| Monoid::from_congruences(2, &[(ivec![a, b], d)]).unwrap())
        }

        fn space() -> impl Strategy<Value = Monoid> {
            (2u64..=6, prop::collection::vec(0i64..6, 3))
                .prop_map(|(d, c)| Monoid::from_congruences(3, &[(IntVec::from(c), d)]).unwrap())
        }

        fn layers_are_strong(layers: &[Vec<IntVec>]) -> std::result::Result<(), TestCaseError> {
            for i in 0..layers.len() {
                let rest: Vec<IntVec> = layers[i..].concat();
                let strong: Vec<IntVec> =
                    rest.iter().filter(|a| classify_among(&rest, a).unwrap().strong).cloned().collect();
                prop_assert_eq!(set(&strong), set(&layers[i]));
            }
            Ok(())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn plane_instances_stratify(m in plane()) {
                let s = stratify(&m).unwrap();
                prop_assert!(s.is_complete());
                let layers = s.layers();
                let union: Vec<IntVec> = layers.concat();
                prop_assert_eq!(union.len(), m.hilbert_basis().unwrap().len());
                prop_assert_eq!(set(&union), set(m.hilbert_basis().unwrap()));
                layers_are_strong(&layers)?;
            }

            #[test]
            fn strong_layers_match_classification(m in space()) {
                layers_are_strong(&strong_layers(&m).unwrap())?;
            }

            #[test]
            fn decompositions_exist(m in plane()) {
                let s = stratify(&m).unwrap();
                let d = Decomposer::new(&m, &s).unwrap();
                for x in box_points(&[14, 14]) {
                    if m.contains(&x).unwrap() {
                        let r = d.decompose(&x).unwrap();
                        prop_assert_eq!(r.reconstruct(d.layers()), x);
                    }
                }
            }

            #[test]
            fn base_plus_one_atom(a in 2i64..8, b in 2i64..8, x in 1i64..8, y in 1i64..8) {
                prop_assume!(x < a && y < b);
                let q = vec![ivec![a, 0], ivec![0, b]];
                let extra = ivec![x, y];
                let mut gens = q.clone();
                gens.push(extra.clone());
                let m = Monoid::from_generators(gens).unwrap();
                let s = stratify(&m).unwrap();
                prop_assert!(s.is_complete());
                let layers = s.layers();
                prop_assert_eq!(layers.len(), 2);
                prop_assert_eq!(set(&layers[0]), set(&q));
                prop_assert_eq!(&layers[1], &vec![extra.clone()]);
                let bound = coset_order(&extra, &q).unwrap();
                let d = Decomposer::new(&m, &s).unwrap();
                for p in box_points(&[2 * a, 2 * b]) {
                    if m.contains(&p).unwrap() {
                        prop_assert!(d.decompose(&p).unwrap().strata[1][0] < bound);
                    }
                }
            }

            #[test]
            fn diamond_has_one_point_per_coset(
                q in prop::collection::vec(prop::collection::vec(0i64..6, 2), 2),
                c in prop::collection::vec(-3i64..=3, 2),
            ) {
                let q: Vec<IntVec> = q.into_iter().map(IntVec::from).collect();
                prop_assume!(is_independent(&q) && q.iter().all(|v| !v.is_zero()));
                let g = &q[0].scale(&BigInt::from(c[0])) + &q[1].scale(&BigInt::from(c[1]));
                prop_assert!(lattice_member(&g, &LatticeBasis::from_generators(2, &q).unwrap()).unwrap());
                let inside = |v: &IntVec| v.is_nonnegative() && coordinates(v, &q).is_ok() && in_diamond(v, &q).unwrap();
                let top = &q[0] + &q[1];
                let diamond: Vec<IntVec> = box_points(&top.to_i64s().unwrap()).filter(inside).collect();
                prop_assert!(diamond.contains(&IntVec::zeros(2)));
                for w in &diamond {
                    if inside(&(w + &g)) {
                        prop_assert!(g.is_zero());
                    }
                }
            }
        }
    }
}
