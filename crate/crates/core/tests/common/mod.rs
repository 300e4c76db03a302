#![allow(dead_code)]

pub mod dependence;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use derivgraph::chase::Derivation;
use derivgraph::graph::DerivationGraph;
use derivgraph::hom::isomorphic_mod_nulls;
use derivgraph::syntax::{parse_document, RuleDocument};
use derivgraph::{Atom, Instance, KnowledgeBase, Substitution, Term};

pub fn rules_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../rules")
}

pub fn load(name: &str) -> RuleDocument {
    let path = rules_dir().join(format!("{name}.rules"));
    let text = std::fs::read_to_string(&path).unwrap();
    parse_document(&text).unwrap()
}

pub fn kb(name: &str) -> KnowledgeBase {
    load(name).knowledge_base().unwrap()
}

pub fn script(name: &str, derivation: &str) -> (KnowledgeBase, Derivation) {
    let doc = load(name);
    let kb = doc.knowledge_base().unwrap();
    let d = doc.derivation(derivation).unwrap().resolve(&kb).unwrap();
    (kb, d)
}

/// Parses a fact list such as `p(a). q(a,_:n1).`
pub fn inst(text: &str) -> Instance {
    // facts must be ground, so nulls go through placeholder constants
    let text = text.replace("_:n", "nullxx");
    let db = parse_document(&text).unwrap().database();
    let to_null = |t: &Term| match t {
        Term::Constant(s) if s.starts_with("nullxx") => Term::null(s[6..].parse().unwrap()),
        t => t.clone(),
    };
    Instance::from_atoms(
        db.iter()
            .map(|a| Atom::new(&a.pred.name, a.args.iter().map(to_null).collect())),
    )
    .unwrap()
}

pub fn c(name: &str) -> Term {
    Term::constant(name)
}

pub fn n(k: u64) -> Term {
    Term::null(k)
}

pub fn terms(ts: &[Term]) -> BTreeSet<Term> {
    ts.iter().cloned().collect()
}

/// The null renaming taking `expected` onto `actual`, panicking if none exists.
pub fn renaming(expected: &Instance, actual: &Instance) -> Substitution {
    isomorphic_mod_nulls(expected, actual)
        .unwrap_or_else(|| panic!("{expected} is not isomorphic to {actual}"))
}

pub fn rename_set(s: &Substitution, set: &BTreeSet<Term>) -> BTreeSet<Term> {
    set.iter().map(|t| s.apply_term(t).unwrap()).collect()
}

/// Arcs of `g` written with the expected null names.
pub fn arcs_as(
    g: &DerivationGraph,
    expected_to_actual: &Substitution,
) -> BTreeMap<(usize, usize), BTreeSet<Term>> {
    let back: BTreeMap<Term, Term> = expected_to_actual
        .iter()
        .map(|(k, v)| (v.clone(), k.clone()))
        .collect();
    g.arcs()
        .iter()
        .map(|(&k, l)| {
            (
                k,
                l.iter()
                    .map(|t| back.get(t).cloned().unwrap_or_else(|| t.clone()))
                    .collect(),
            )
        })
        .collect()
}
