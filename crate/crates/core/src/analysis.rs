//! Rule dependence, the graph of rule dependencies, greediness of
//! derivations, step permutation and greedy re-derivation search.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::chase::{all_triggers, apply_rule, triggers, Derivation, Step};
use crate::error::{Error, Result};
use crate::hom::{embed_mod_nulls, find_homomorphisms, isomorphic_mod_nulls};
use crate::model::{Atom, Instance, KnowledgeBase, Limits, NullGen, Rule, Substitution, Term};

fn rename_apart(atoms: &[Atom], tag: &str) -> Vec<Atom> {
    atoms
        .iter()
        .map(|a| Atom {
            pred: a.pred.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Variable(n) => Term::Variable(Arc::from(format!("{tag}{n}"))),
                    _ => t.clone(),
                })
                .collect(),
        })
        .collect()
}

/// Calls `f` with every set partition of `0..n`, as a block index per element.
fn for_each_partition(n: usize, f: &mut impl FnMut(&[usize], usize) -> bool) -> bool {
    fn go(
        i: usize,
        blocks: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize], usize) -> bool,
    ) -> bool {
        if i == cur.len() {
            return f(cur, blocks);
        }
        for b in 0..=blocks {
            cur[i] = b;
            let nb = if b == blocks { blocks + 1 } else { blocks };
            if go(i + 1, nb, cur, f) {
                return true;
            }
        }
        false
    }
    let mut cur = vec![0; n];
    go(0, 0, &mut cur, f)
}

/// Calls `f` with every injective partial assignment of `blocks` blocks to
/// constants (`None` = fresh term).
fn for_each_constant_choice(
    blocks: usize,
    constants: &[Term],
    f: &mut impl FnMut(&[Option<usize>]) -> bool,
) -> bool {
    fn go(
        i: usize,
        cur: &mut Vec<Option<usize>>,
        n_const: usize,
        f: &mut impl FnMut(&[Option<usize>]) -> bool,
    ) -> bool {
        if i == cur.len() {
            return f(cur);
        }
        cur[i] = None;
        if go(i + 1, cur, n_const, f) {
            return true;
        }
        for c in 0..n_const {
            if cur[..i].contains(&Some(c)) {
                continue;
            }
            cur[i] = Some(c);
            if go(i + 1, cur, n_const, f) {
                return true;
            }
        }
        cur[i] = None;
        false
    }
    let mut cur = vec![None; blocks];
    go(0, &mut cur, constants.len(), f)
}

fn dependence_witness(r2: &Rule, r1: &Rule, inst: &Instance) -> bool {
    if !find_homomorphisms(r2.body(), inst, &Substitution::new(), Some(1)).is_empty() {
        return false;
    }
    let rules = std::slice::from_ref(r1);
    triggers(inst, r1).iter().any(|h| {
        let mut nulls = NullGen::after(inst);
        let (next, _) = apply_rule(inst, rules, 0, h, &mut nulls).expect("h is a trigger");
        !find_homomorphisms(r2.body(), &next, &Substitution::new(), Some(1)).is_empty()
    })
}

/// Whether `r2` depends on `r1`: some instance `I` has no trigger for `r2`, a
/// trigger `h` for `r1`, and `r2` is triggered in `Ch(I, r1, h)`.
///
/// A witness can always be shrunk to `h(body(r1)) ∪ h'(B)` where `B` is the
/// part of `body(r2)` matched outside the new atoms, and every such instance
/// is a specialisation of one of the candidates built here, which has no more
/// `r2` triggers. Candidates are the images of `body(r1) ∪ B` for every proper
/// subset `B` of `body(r2)` under every identification pattern of their
/// (renamed apart) variables, with blocks either fresh or rule constants.
pub fn depends_on(r2: &Rule, r1: &Rule) -> bool {
    let b1 = rename_apart(r1.body(), "1#");
    let b2 = rename_apart(r2.body(), "2#");
    let constants: Vec<Term> = r1.constants().union(&r2.constants()).cloned().collect();
    let n = b2.len();
    for mask in 0..(1u32 << n) - 1 {
        let mut atoms = b1.clone();
        atoms.extend((0..n).filter(|k| mask & (1 << k) != 0).map(|k| b2[k].clone()));
        let vars: Vec<Term> = atoms
            .iter()
            .flat_map(|a| a.variables().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let found = for_each_partition(vars.len(), &mut |blocks_of, blocks| {
            for_each_constant_choice(blocks, &constants, &mut |choice| {
                let mut s = Substitution::new();
                for (v, &b) in vars.iter().zip(blocks_of) {
                    let t = match choice[b] {
                        Some(c) => constants[c].clone(),
                        None => Term::Null(b as u64 + 1),
                    };
                    s.insert_unchecked(v.clone(), t);
                }
                let inst = Instance::from_atoms(
                    atoms.iter().map(|a| s.apply_atom(a).expect("all variables bound")),
                )
                .expect("ground image");
                dependence_witness(r2, r1, &inst)
            })
        });
        if found {
            return true;
        }
    }
    false
}

/// The graph of rule dependencies: an edge `(i, j)` means rule `j` depends on rule `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleDependencyGraph {
    pub rules: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl RuleDependencyGraph {
    /// Rules with no incoming edge.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.rules.len())
            .filter(|&j| !self.edges.iter().any(|&(_, t)| t == j))
            .collect()
    }

    fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.rules.len();
        let mut r = vec![vec![false; n]; n];
        for &(a, b) in &self.edges {
            r[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    /// Topological layer of each rule: the longest path to it from a source
    /// of the strongly connected component graph.
    pub fn layers(&self) -> Vec<usize> {
        let n = self.rules.len();
        let reach = self.reachability();
        let same = |a: usize, b: usize| a == b || (reach[a][b] && reach[b][a]);
        let mut layer = vec![0usize; n];
        // Longest paths are bounded by n, so n rounds of relaxation suffice.
        for _ in 0..n {
            let mut changed = false;
            for &(a, b) in &self.edges {
                if !same(a, b) && layer[b] < layer[a] + 1 {
                    layer[b] = layer[a] + 1;
                    changed = true;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    if same(a, b) && layer[a] < layer[b] {
                        layer[a] = layer[b];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        layer
    }
}

pub fn rule_dependency_graph(rules: &[Rule]) -> RuleDependencyGraph {
    let mut edges = BTreeSet::new();
    for (i, r1) in rules.iter().enumerate() {
        for (j, r2) in rules.iter().enumerate() {
            if depends_on(r2, r1) {
                edges.insert((i, j));
            }
        }
    }
    RuleDependencyGraph {
        rules: rules.iter().map(|r| r.id().to_string()).collect(),
        edges,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepWitness {
    pub step: usize,
    pub rule: String,
    pub frontier_image: BTreeSet<Term>,
    /// The earliest step `j < step` covering the frontier image (0 = constants
    /// and initial nulls only), or `None` for a violation.
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedinessReport {
    pub greedy: bool,
    pub steps: Vec<StepWitness>,
    pub first_violation: Option<usize>,
}

fn greedy_base(d: &Derivation, rules: &[Rule]) -> BTreeSet<Term> {
    let mut base = d.initial().constants();
    base.extend(d.initial().nulls());
    for r in rules {
        base.extend(r.constants());
    }
    base
}

fn head_nulls(d: &Derivation, rules: &[Rule], j: usize) -> BTreeSet<Term> {
    let t = &d.step(j).trigger;
    t.head_image(&rules[t.rule])
        .iter()
        .flat_map(|a| a.nulls().cloned())
        .collect()
}

fn covers(base: &BTreeSet<Term>, extra: &BTreeSet<Term>, f: &BTreeSet<Term>) -> bool {
    f.iter().all(|t| base.contains(t) || extra.contains(t))
}

fn step_witness(d: &Derivation, rules: &[Rule], base: &BTreeSet<Term>, i: usize) -> StepWitness {
    let t = &d.step(i).trigger;
    let rule = &rules[t.rule];
    let f = t.frontier_image(rule);
    let empty = BTreeSet::new();
    let witness = if covers(base, &empty, &f) {
        Some(0)
    } else {
        (1..i).find(|&j| covers(base, &head_nulls(d, rules, j), &f))
    };
    StepWitness {
        step: i,
        rule: rule.id().to_string(),
        frontier_image: f,
        witness,
    }
}

/// Checks whether every step's frontier image lies in the nulls of a single
/// earlier step's head image, together with the constants and initial nulls.
pub fn is_greedy(d: &Derivation, rules: &[Rule]) -> GreedinessReport {
    let base = greedy_base(d, rules);
    let steps: Vec<StepWitness> = (1..=d.len())
        .map(|i| step_witness(d, rules, &base, i))
        .collect();
    let first_violation = steps.iter().find(|w| w.witness.is_none()).map(|w| w.step);
    GreedinessReport {
        greedy: first_violation.is_none(),
        steps,
        first_violation,
    }
}

impl GreedinessReport {
    /// Re-checks the recorded witnesses and violations against `d`.
    pub fn verify(&self, d: &Derivation, rules: &[Rule]) -> bool {
        let base = greedy_base(d, rules);
        if self.steps.len() != d.len() {
            return false;
        }
        let consistent = self.steps.iter().all(|w| {
            let t = &d.step(w.step).trigger;
            let f = t.frontier_image(&rules[t.rule]);
            if f != w.frontier_image {
                return false;
            }
            match w.witness {
                Some(0) => covers(&base, &BTreeSet::new(), &f),
                Some(j) => j < w.step && covers(&base, &head_nulls(d, rules, j), &f),
                None => {
                    !covers(&base, &BTreeSet::new(), &f)
                        && (1..w.step).all(|j| !covers(&base, &head_nulls(d, rules, j), &f))
                }
            }
        });
        consistent && self.greedy == self.steps.iter().all(|w| w.witness.is_some())
    }
}

/// Swaps steps `i` and `i + 1` (counted from 1). Requires the later step's
/// body image to be present before step `i`.
pub fn permute_adjacent(d: &Derivation, i: usize, rules: &[Rule]) -> Result<Derivation> {
    if i == 0 || i >= d.len() {
        return Err(Error::NotPermutable(i));
    }
    let first = d.step(i);
    let second = d.step(i + 1);
    let before = d.instance(i - 1);
    let r2 = &rules[second.trigger.rule];
    for a in r2.body() {
        if !before.contains(&second.trigger.hom.apply_atom(a)?) {
            return Err(Error::NotPermutable(i));
        }
    }
    let mut moved = before.clone();
    moved.extend_unchecked(second.trigger.head_image(r2));
    let mut steps: Vec<Step> = d.steps()[..i - 1].to_vec();
    steps.push(Step {
        trigger: second.trigger.clone(),
        instance: moved,
    });
    steps.push(Step {
        trigger: first.trigger.clone(),
        instance: second.instance.clone(),
    });
    steps.extend_from_slice(&d.steps()[i + 1..]);
    Ok(Derivation::from_parts(d.initial().clone(), steps))
}

/// Sorts steps by GRD layer, then by the earliest later step consuming one
/// of their new atoms, then by position, using only legal adjacent swaps.
pub fn normalize_by_grd(d: &Derivation, grd: &RuleDependencyGraph, rules: &[Rule]) -> Derivation {
    let layers = grd.layers();
    let n = d.len();
    let mut keys: Vec<(usize, usize, usize)> = (1..=n)
        .map(|s| {
            let new = d.instance(s).difference(d.instance(s - 1));
            let consumer = (s + 1..=n)
                .find(|&j| {
                    let t = &d.step(j).trigger;
                    rules[t.rule]
                        .body()
                        .iter()
                        .any(|a| new.contains(&t.hom.apply_atom(a).expect("valid trigger")))
                })
                .unwrap_or(usize::MAX);
            (layers[d.step(s).trigger.rule], consumer, s)
        })
        .collect();
    let mut cur = d.clone();
    loop {
        let mut changed = false;
        for i in 1..n {
            if keys[i - 1] > keys[i] {
                if let Ok(next) = permute_adjacent(&cur, i, rules) {
                    cur = next;
                    keys.swap(i - 1, i);
                    changed = true;
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

struct Rederive<'a, F> {
    rules: &'a [Rule],
    target: &'a Instance,
    greedy_prefixes: bool,
    accept: F,
    visited: usize,
    cap: usize,
}

impl<F: FnMut(&Derivation) -> Result<bool>> Rederive<'_, F> {
    fn dfs(&mut self, d: &Derivation, nulls: &NullGen, remaining: usize) -> Result<Option<Derivation>> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::ResourceLimit(format!(
                "re-derivation search exceeded {} derivations",
                self.cap
            )));
        }
        if remaining == 0 {
            let hit = isomorphic_mod_nulls(d.final_instance(), self.target).is_some()
                && (self.accept)(d)?;
            return Ok(hit.then(|| d.clone()));
        }
        let base = self.greedy_prefixes.then(|| greedy_base(d, self.rules));
        for (rule, hom) in all_triggers(d.final_instance(), self.rules) {
            let mut g = nulls.clone();
            let mut child = d.clone();
            child.apply(self.rules, rule, &hom, &mut g)?;
            if embed_mod_nulls(child.final_instance(), self.target).is_none() {
                continue;
            }
            if let Some(base) = &base {
                if step_witness(&child, self.rules, base, child.len())
                    .witness
                    .is_none()
                {
                    continue;
                }
            }
            if let Some(found) = self.dfs(&child, &g, remaining - 1)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

/// Iterative-deepening search for a derivation from the database whose final
/// instance is isomorphic to `target` modulo nulls and which `accept`s.
///
/// With `greedy_prefixes`, branches whose latest step is not greedy are cut
/// (greediness of a step depends only on earlier steps).
pub fn find_rederivation(
    kb: &KnowledgeBase,
    target: &Instance,
    max_len: usize,
    limits: &Limits,
    greedy_prefixes: bool,
    accept: impl FnMut(&Derivation) -> Result<bool>,
) -> Result<Option<Derivation>> {
    let db = kb.database();
    if embed_mod_nulls(db, target).is_none() {
        return Ok(None);
    }
    let mut search = Rederive {
        rules: kb.rules(),
        target,
        greedy_prefixes,
        accept,
        visited: 0,
        cap: limits.max_derivations,
    };
    let start = Derivation::new(db.clone());
    for len in 0..=max_len {
        if let Some(d) = search.dfs(&start, &NullGen::after(db), len)? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// A shortest greedy derivation of `target` (modulo nulls) of length at most `max_len`.
pub fn find_greedy_rederivation(
    kb: &KnowledgeBase,
    target: &Instance,
    max_len: usize,
    limits: &Limits,
) -> Result<Option<Derivation>> {
    let rules = kb.rules();
    find_rederivation(kb, target, max_len, limits, true, |d| {
        Ok(is_greedy(d, rules).greedy)
    })
}

/// Renames the nulls of a derivation; used to check renaming invariance.
pub fn rename_nulls(d: &Derivation, map: &BTreeMap<Term, Term>) -> Derivation {
    let s = Substitution::from_pairs(map.iter().map(|(k, v)| (k.clone(), v.clone())))
        .expect("nulls only");
    let inst = |i: &Instance| {
        Instance::from_atoms(i.iter().map(|a| s.apply_atom(a).expect("ground")))
            .expect("ground")
    };
    let sub = |h: &Substitution| {
        Substitution::from_pairs(
            h.iter()
                .map(|(k, v)| (k.clone(), s.apply_term(v).expect("ground"))),
        )
        .expect("variables only")
    };
    let steps = d
        .steps()
        .iter()
        .map(|st| Step {
            trigger: crate::chase::Trigger {
                rule: st.trigger.rule,
                hom: sub(&st.trigger.hom),
                extension: sub(&st.trigger.extension),
            },
            instance: inst(&st.instance),
        })
        .collect();
    Derivation::from_parts(inst(d.initial()), steps)
}
