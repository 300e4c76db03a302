//! Brute-force oracles for rule dependence and homomorphism search.

mod common;

use std::collections::BTreeSet;

use common::dependence::depends_brute;
use common::*;
use derivgraph::analysis::{depends_on, rule_dependency_graph};
use derivgraph::hom::find_homomorphisms;
use derivgraph::{Atom, Instance, Rule, Substitution, Term};
use proptest::prelude::*;

fn check_all_pairs(rules: &[Rule]) -> Vec<String> {
    let mut disagreements = Vec::new();
    for r1 in rules {
        for r2 in rules {
            let fast = depends_on(r2, r1);
            let slow = depends_brute(r2, r1);
            if fast != slow {
                disagreements.push(format!("{} on {}: {fast} vs {slow}", r2.id(), r1.id()));
            }
        }
    }
    disagreements
}

#[test]
fn dependence_agrees_on_r2_and_r3() {
    for name in ["r2", "r3"] {
        let kb = kb(name);
        assert_eq!(check_all_pairs(kb.rules()), Vec::<String>::new(), "{name}");
    }
}

#[test]
fn grd_of_r3() {
    let kb = kb("r3");
    let grd = rule_dependency_graph(kb.rules());
    // r3 cannot use the q atom of r1: its second argument is a fresh null,
    // which no r atom of the instance can mention
    let edges: Vec<_> = grd.edges.iter().copied().collect();
    assert_eq!(edges, vec![(0, 1), (1, 2), (1, 3), (2, 3)]);
}

#[test]
fn no_rule_depends_on_itself() {
    let r = Rule::new(
        "r",
        vec![Atom::new("p", vec![Term::var("X")])],
        vec![Atom::new("p", vec![Term::var("Y")])],
    )
    .unwrap();
    assert!(!depends_on(&r, &r));
    assert!(!depends_brute(&r, &r));
}

fn arb_term(vars: usize, consts: usize) -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => (0..vars).prop_map(|i| Term::var(&format!("X{i}"))),
        1 => (0..consts).prop_map(|i| Term::constant(["a", "b"][i])),
    ]
}

fn arb_atom(vars: usize) -> impl Strategy<Value = Atom> {
    (0..2usize).prop_flat_map(move |p| {
        let arity = p + 1;
        proptest::collection::vec(arb_term(vars, 2), arity).prop_map(move |args| Atom::new(&format!("p{p}"), args))
    })
}

fn arb_rule(id: &'static str) -> impl Strategy<Value = Rule> {
    (
        proptest::collection::vec(arb_atom(2), 1..=2),
        proptest::collection::vec(arb_atom(3), 1..=2),
    )
        .prop_map(move |(body, head)| Rule::new(id, body, head).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dependence_agrees_on_random_rules(r1 in arb_rule("a"), r2 in arb_rule("b")) {
        prop_assert_eq!(depends_on(&r2, &r1), depends_brute(&r2, &r1), "{} / {}", r1, r2);
        prop_assert_eq!(depends_on(&r1, &r1), depends_brute(&r1, &r1));
    }
}

/// All maps from the source variables to target terms, filtered to homomorphisms.
fn homs_brute(source: &[Atom], target: &Instance) -> BTreeSet<Substitution> {
    let vars: Vec<Term> = source
        .iter()
        .flat_map(|a| a.variables().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let terms: Vec<Term> = target.terms().into_iter().collect();
    let mut out = BTreeSet::new();
    if terms.is_empty() && !vars.is_empty() {
        return out;
    }
    let total = terms.len().max(1).pow(vars.len() as u32);
    for mut code in 0..total {
        let mut pairs = Vec::new();
        for v in &vars {
            pairs.push((v.clone(), terms[code % terms.len()].clone()));
            code /= terms.len().max(1);
        }
        let s = Substitution::from_pairs(pairs).unwrap();
        if source.iter().all(|a| target.contains(&s.apply_atom(a).unwrap())) {
            out.insert(s);
        }
    }
    out
}

fn arb_ground_atom() -> impl Strategy<Value = Atom> {
    (0..2usize).prop_flat_map(|p| {
        proptest::collection::vec(
            prop_oneof![(0..2usize).prop_map(|i| c(["a", "b"][i])), (1..4u64).prop_map(n)],
            p + 1,
        )
        .prop_map(move |args| Atom::new(&format!("p{p}"), args))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn homomorphisms_agree_with_assignment_enumeration(
        source in proptest::collection::vec(arb_atom(3), 1..=3),
        target in proptest::collection::btree_set(arb_ground_atom(), 0..=6),
    ) {
        let target = Instance::from_atoms(target).unwrap();
        let fast: BTreeSet<Substitution> =
            find_homomorphisms(&source, &target, &Substitution::new(), None).into_iter().collect();
        prop_assert_eq!(fast, homs_brute(&source, &target));
    }
}
