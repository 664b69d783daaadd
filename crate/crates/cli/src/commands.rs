use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use stratamon::block::{block_monoid, block_to_congruence, is_elementary, GroupSpec};
use stratamon::extraction::{classify_all, classify_atom, coordinates, coset_order, extraction_grade, in_diamond};
use stratamon::hilbert::apery;
use stratamon::monoid::{elliott_monoid, Monoid};
use stratamon::oracle::{self, Bounds};
use stratamon::stratify::{
    check_coprime, find_relation, parametrize, stratify, strong_layers, verify_bijection, Decomposer,
};
use stratamon::{ivec, Error, IntVec, Result};

use crate::{Command, Example, OracleQuery, Source};

fn parse<T: DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::input(format!("bad {what}: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::internal(format!("serialization failed: {e}")))
}

fn monoid(source: &Source) -> Result<Monoid> {
    Monoid::from_json(&source.text()?)
}

pub fn run(command: Command) -> Result<Value> {
    match command {
        Command::Hilbert { source } => {
            let m = monoid(&source)?;
            Ok(json!({ "atoms": to_value(&m.hilbert_basis()?)? }))
        }
        Command::Apery { source, base, bound } => {
            let m = monoid(&source)?;
            let base: Vec<IntVec> = parse("base", &base)?;
            to_value(&apery(&m, &base, bound.bound)?)
        }
        Command::Lambda { source, x, y } => {
            let m = monoid(&source)?;
            let (x, y): (IntVec, IntVec) = (parse("x", &x)?, parse("y", &y)?);
            let grade = extraction_grade(&m, &x, &y)?;
            Ok(json!({ "x": to_value(&x)?, "y": to_value(&y)?, "grade": to_value(&grade)? }))
        }
        Command::Classify { source, bound } => {
            let m = monoid(&source)?;
            Ok(json!({
                "atoms": to_value(&classify_all(&m)?)?,
                "root_closure": to_value(&m.is_root_closed(bound.bound)?)?,
            }))
        }
        Command::Coords { base, element } => {
            let base: Vec<IntVec> = parse("base", &base)?;
            let x: IntVec = parse("element", &element)?;
            Ok(json!({
                "coordinates": to_value(&coordinates(&x, &base)?)?,
                "in_diamond": in_diamond(&x, &base)?,
                "coset_order": coset_order(&x, &base)?.to_string(),
            }))
        }
        Command::Stratify { source } => to_value(&stratify(&monoid(&source)?)?),
        Command::Decompose { source, element } => {
            let m = monoid(&source)?;
            let x: IntVec = parse("element", &element)?;
            let s = stratify(&m)?;
            let d = Decomposer::new(&m, &s)?;
            let r = d.decompose(&x)?;
            Ok(json!({ "strata": to_value(&s.layers())?, "representation": to_value(&r)? }))
        }
        Command::Parametrize { source } => {
            let m = monoid(&source)?;
            to_value(&parametrize(&m, &stratify(&m)?)?)
        }
        Command::Verify { source, bound } => {
            let m = monoid(&source)?;
            let p = parametrize(&m, &stratify(&m)?)?;
            to_value(&verify_bijection(&m, &p, bound.bound)?)
        }
        Command::Block { source } => block(&parse::<GroupSpec>("group", &source.text()?)?),
        Command::Oracle { query } => run_oracle(query),
        Command::Reproduce { example } => match example {
            Example::ElliottMod7 => elliott_mod7(),
            Example::Mod11Counterexample => mod11(),
        },
    }
}

fn block(g: &GroupSpec) -> Result<Value> {
    let m = block_monoid(g)?;
    let mut atoms = Vec::new();
    for a in m.hilbert_basis()? {
        let elementary = is_elementary(g, &g.sequence(a.clone())?)?;
        let strong = classify_atom(&m, a)?.strong;
        atoms.push(json!({ "sequence": to_value(a)?, "elementary": elementary, "strong": strong }));
    }
    Ok(json!({ "system": to_value(&block_to_congruence(g)?)?, "atoms": atoms }))
}

fn run_oracle(query: OracleQuery) -> Result<Value> {
    match query {
        OracleQuery::Elements { source, bound } => {
            let m = monoid(&source)?;
            let e = oracle::enum_monoid(&m, &Bounds::uniform(m.dim(), bound.bound)?)?;
            Ok(json!({ "count": e.len(), "elements": to_value(&e)? }))
        }
        OracleQuery::Atoms { source, bound } => {
            let m = monoid(&source)?;
            Ok(json!({ "atoms": to_value(&oracle::brute_atoms(&m, &Bounds::uniform(m.dim(), bound.bound)?)?)? }))
        }
        OracleQuery::Apery { source, base, bound } => {
            let m = monoid(&source)?;
            let base: Vec<IntVec> = parse("base", &base)?;
            let ap = oracle::brute_apery(&m, &base, &Bounds::uniform(m.dim(), bound.bound)?)?;
            Ok(json!({ "elements": to_value(&ap)? }))
        }
        OracleQuery::Lambda { source, x, y, max_den } => {
            let m = monoid(&source)?;
            let (x, y): (IntVec, IntVec) = (parse("x", &x)?, parse("y", &y)?);
            Ok(json!({ "grade": oracle::brute_grade(&m, &x, &y, max_den)?.to_string(), "max_den": max_den }))
        }
        OracleQuery::Representations { source, element } => {
            let m = monoid(&source)?;
            let x: IntVec = parse("element", &element)?;
            let s = stratify(&m)?;
            let reps = oracle::brute_representations(&m, &s.layers(), &x)?;
            Ok(json!({ "strata": to_value(&s.layers())?, "representations": to_value(&reps)? }))
        }
    }
}

fn elliott_mod7() -> Result<Value> {
    let (m, embedding) = elliott_monoid(1, 2, 7)?;
    let s = stratify(&m)?;
    let p = parametrize(&m, &s)?;
    let d = Decomposer::new(&m, &s)?;
    let mut examples = Vec::new();
    for x in [ivec![6, 4], ivec![13, 11], ivec![0, 0]] {
        let r = d.decompose(&x)?;
        examples.push(json!({ "solution": to_value(&embedding.embed(&x)?)?, "representation": to_value(&r)? }));
    }
    let report = verify_bijection(&m, &p, 40)?;
    Ok(json!({
        "equation": "x + 2y = 7z",
        "atoms": to_value(&m.hilbert_basis()?)?,
        "apery_first_stratum": to_value(&apery(&m, &s.layers()[0], 40)?.elements)?,
        "stratification": to_value(&s)?,
        "parametrization": to_value(&p)?,
        "constraints": p.constraints.iter().map(|c| p.render_clause(c)).collect::<Vec<_>>(),
        "decompositions": examples,
        "bijection": to_value(&report)?,
    }))
}

fn mod11() -> Result<Value> {
    let m = Monoid::from_congruences(3, &[(ivec![4, 5, 8], 11)])?;
    let layers = strong_layers(&m)?;
    let relations: Vec<Value> =
        layers.iter().map(|l| find_relation(l).map_or(Ok(Value::Null), |r| to_value(&r))).collect::<Result<_>>()?;
    let first = apery(&m, &layers[0], 11)?;
    let tail: Vec<IntVec> = layers[3..].concat();
    let coprime = check_coprime(&Monoid::from_generators(tail)?, &layers[3], 20)?;
    Ok(json!({
        "congruence": "4x + 5y + 8z = 0 mod 11",
        "atoms": to_value(&m.hilbert_basis()?)?,
        "apery_first_stratum_size": first.elements.len(),
        "strong_layers": to_value(&layers)?,
        "layer_relations": relations,
        "last_layer_coprime": to_value(&coprime)?,
        "stratification": to_value(&stratify(&m)?)?,
    }))
}
