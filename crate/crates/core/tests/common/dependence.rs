//! Rule dependence decided by searching small instances directly.

use std::collections::{BTreeMap, BTreeSet};

use derivgraph::{Atom, Predicate, Rule, Term};

/// Every extension of `h` mapping `atoms` into `target`, by plain backtracking.
fn matches(atoms: &[Atom], target: &BTreeSet<Atom>, h: &BTreeMap<Term, Term>) -> Vec<BTreeMap<Term, Term>> {
    let Some((first, rest)) = atoms.split_first() else {
        return vec![h.clone()];
    };
    let mut out = Vec::new();
    for t in target {
        if t.pred != first.pred {
            continue;
        }
        let mut h2 = h.clone();
        let ok = first.args.iter().zip(&t.args).all(|(a, b)| {
            if !a.is_variable() {
                return a == b;
            }
            match h2.get(a) {
                Some(x) => x == b,
                None => {
                    h2.insert(a.clone(), b.clone());
                    true
                }
            }
        });
        if ok {
            out.extend(matches(rest, target, &h2));
        }
    }
    out
}

fn triggered(rule: &Rule, inst: &BTreeSet<Atom>) -> bool {
    !matches(rule.body(), inst, &BTreeMap::new()).is_empty()
}

fn chase_step(inst: &BTreeSet<Atom>, rule: &Rule, h: &BTreeMap<Term, Term>) -> BTreeSet<Atom> {
    let mut h = h.clone();
    for (k, z) in rule.existentials().iter().enumerate() {
        h.insert(z.clone(), Term::null(1000 + k as u64));
    }
    let mut out = inst.clone();
    for a in rule.head() {
        let args = a.args.iter().map(|t| h.get(t).cloned().unwrap_or_else(|| t.clone())).collect();
        out.insert(Atom { pred: a.pred.clone(), args });
    }
    out
}

fn all_atoms(preds: &BTreeSet<Predicate>, universe: &[Term]) -> Vec<Atom> {
    let mut out = Vec::new();
    for p in preds {
        let mut idx = vec![0usize; p.arity];
        loop {
            out.push(Atom {
                pred: p.clone(),
                args: idx.iter().map(|&i| universe[i].clone()).collect(),
            });
            let mut k = 0;
            while k < p.arity {
                idx[k] += 1;
                if idx[k] < universe.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == p.arity {
                break;
            }
        }
    }
    out
}

/// Searches every instance over the body predicates with at most
/// |body(r1)| + |body(r2)| atoms over a small universe plus the rule constants.
pub fn depends_brute(r2: &Rule, r1: &Rule) -> bool {
    let vars = |r: &Rule| r.body_variables().len();
    let size = (vars(r1) + vars(r2)).min(3);
    let mut universe: Vec<Term> = (0..size).map(|i| Term::constant(&format!("u{i}"))).collect();
    universe.extend(r1.constants().union(&r2.constants()).cloned());
    let preds: BTreeSet<Predicate> = r1.body().iter().chain(r2.body()).map(|a| a.pred.clone()).collect();
    let atoms = all_atoms(&preds, &universe);
    let max = r1.body().len() + r2.body().len();
    let mut chosen = Vec::new();
    search(&atoms, 0, max, &mut chosen, r1, r2)
}

fn search(atoms: &[Atom], from: usize, left: usize, chosen: &mut Vec<Atom>, r1: &Rule, r2: &Rule) -> bool {
    let inst: BTreeSet<Atom> = chosen.iter().cloned().collect();
    if !triggered(r2, &inst) {
        for h in matches(r1.body(), &inst, &BTreeMap::new()) {
            if triggered(r2, &chase_step(&inst, r1, &h)) {
                return true;
            }
        }
    }
    if left == 0 {
        return false;
    }
    for k in from..atoms.len() {
        chosen.push(atoms[k].clone());
        let found = search(atoms, k + 1, left - 1, chosen, r1, r2);
        chosen.pop();
        if found {
            return true;
        }
    }
    false
}

