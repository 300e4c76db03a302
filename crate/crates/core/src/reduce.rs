//! Arc removal, term removal and cycle removal on derivation graphs, and the
//! search for reduction sequences that leave every node with at most one parent.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Arcs, DerivationGraph};
use crate::model::{Limits, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ReductionStep {
    /// Remove the arc `(X_i, X_j)`, whose label is empty.
    Ar { i: usize, j: usize },
    /// Remove `t` from the label of `(X_i, X_k)`; `(X_j, X_k)` keeps it.
    Tr { i: usize, j: usize, k: usize, t: Term },
    /// Replace `(X_i, X_k)` and `(X_j, X_k)` by `(X_l, X_k)`.
    Cr { i: usize, j: usize, k: usize, l: usize },
}

impl fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionStep::Ar { i, j } => write!(f, "AR({i},{j})"),
            ReductionStep::Tr { i, j, k, t } => write!(f, "TR({i},{j},{k},{t})"),
            ReductionStep::Cr { i, j, k, l } => write!(f, "CR({i},{j},{k},{l})"),
        }
    }
}

fn violated(msg: String) -> Error {
    Error::SideConditionViolated(msg)
}

fn label<'a>(g: &'a DerivationGraph, i: usize, k: usize) -> Result<&'a BTreeSet<Term>> {
    g.label(i, k)
        .ok_or_else(|| violated(format!("no arc (X{i},X{k})")))
}

pub fn apply_ar(g: &DerivationGraph, i: usize, j: usize) -> Result<DerivationGraph> {
    if !label(g, i, j)?.is_empty() {
        return Err(violated(format!("label of (X{i},X{j}) is not empty")));
    }
    let mut out = g.clone();
    out.arcs_mut().remove(&(i, j));
    Ok(out)
}

pub fn apply_tr(g: &DerivationGraph, i: usize, j: usize, k: usize, t: &Term) -> Result<DerivationGraph> {
    if i == j {
        return Err(violated("term removal needs two distinct arcs".into()));
    }
    if !label(g, i, k)?.contains(t) || !label(g, j, k)?.contains(t) {
        return Err(violated(format!("{t} is not shared by (X{i},X{k}) and (X{j},X{k})")));
    }
    let mut out = g.clone();
    out.arcs_mut().get_mut(&(i, k)).expect("arc exists").remove(t);
    Ok(out)
}

pub fn apply_cr(g: &DerivationGraph, i: usize, j: usize, k: usize, l: usize) -> Result<DerivationGraph> {
    if i == j {
        return Err(violated("cycle removal needs two distinct arcs".into()));
    }
    if l >= k {
        return Err(violated(format!("target X{l} does not precede X{k}")));
    }
    let mut union = label(g, i, k)?.clone();
    union.extend(label(g, j, k)?.iter().cloned());
    if !union.is_subset(&g.terms(l)) {
        return Err(violated(format!("labels are not within terms(X{l})")));
    }
    let mut out = g.clone();
    let arcs = out.arcs_mut();
    arcs.remove(&(i, k));
    arcs.remove(&(j, k));
    // An existing (X_l, X_k) keeps its terms, so the incoming labels of X_k
    // still cover its frontier.
    arcs.entry((l, k)).or_default().extend(union);
    Ok(out)
}

pub fn apply_step(g: &DerivationGraph, step: &ReductionStep) -> Result<DerivationGraph> {
    match step {
        ReductionStep::Ar { i, j } => apply_ar(g, *i, *j),
        ReductionStep::Tr { i, j, k, t } => apply_tr(g, *i, *j, *k, t),
        ReductionStep::Cr { i, j, k, l } => apply_cr(g, *i, *j, *k, *l),
    }
}

/// True iff the underlying undirected graph is a forest.
pub fn is_cycle_free(g: &DerivationGraph) -> bool {
    let mut parent: Vec<usize> = (0..g.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(i, j) in g.arcs().keys() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// True iff every node has at most one parent. Since arcs point forward,
/// such a graph is also cycle-free.
pub fn is_tree_shaped(g: &DerivationGraph) -> bool {
    let mut seen = BTreeSet::new();
    g.arcs().keys().all(|&(_, j)| seen.insert(j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    CrOnly,
    Full,
}

/// A reduction sequence together with the graph it starts from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub initial: DerivationGraph,
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn new(initial: DerivationGraph) -> ReductionTrace {
        ReductionTrace {
            initial,
            steps: Vec::new(),
        }
    }

    /// The initial graph followed by the graph after each step.
    pub fn graphs(&self) -> Result<Vec<DerivationGraph>> {
        let mut out = vec![self.initial.clone()];
        for s in &self.steps {
            let next = apply_step(out.last().unwrap(), s)?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn final_graph(&self) -> Result<DerivationGraph> {
        Ok(self.graphs()?.pop().unwrap())
    }

    /// The final graph leaves every node with at most one parent.
    pub fn is_complete(&self) -> Result<bool> {
        Ok(is_tree_shaped(&self.final_graph()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    Reduced(ReductionTrace),
    Irreducible,
    /// The state cap was hit before the search space was exhausted.
    Unknown { states: usize },
}

impl ReductionOutcome {
    pub fn trace(&self) -> Option<&ReductionTrace> {
        match self {
            ReductionOutcome::Reduced(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_reduced(&self) -> bool {
        matches!(self, ReductionOutcome::Reduced(_))
    }
}

/// Searches for a reduction sequence after which every node has at most one parent.
pub fn reduce(g: &DerivationGraph, strategy: Strategy, limits: &Limits) -> ReductionOutcome {
    match strategy {
        Strategy::CrOnly => reduce_cr_only(g),
        Strategy::Full => reduce_full(g, limits.max_states),
    }
}

fn convergence_point(g: &DerivationGraph) -> Option<usize> {
    (0..g.len()).find(|&k| g.parents(k).len() >= 2)
}

/// Resolves convergence points in index order. For each one, the smallest
/// earlier node covering all incoming labels absorbs the arcs pairwise; if
/// no node covers them, no sequence of cycle removals can, since cycle
/// removal never shrinks the union of a node's incoming labels.
fn reduce_cr_only(g: &DerivationGraph) -> ReductionOutcome {
    let mut trace = ReductionTrace::new(g.clone());
    let mut cur = g.clone();
    while let Some(k) = convergence_point(&cur) {
        let union = cur.incoming_label_union(k);
        let Some(l) = (0..k).find(|&l| union.is_subset(&cur.terms(l))) else {
            return ReductionOutcome::Irreducible;
        };
        loop {
            let ps = cur.parents(k);
            if ps.len() < 2 {
                break;
            }
            let (a, b) = if ps.contains(&l) {
                (l, *ps.iter().find(|&&p| p != l).unwrap())
            } else {
                (ps[0], ps[1])
            };
            let (i, j) = (a.min(b), a.max(b));
            cur = apply_cr(&cur, i, j, k, l).expect("side conditions hold by construction");
            trace.steps.push(ReductionStep::Cr { i, j, k, l });
        }
    }
    ReductionOutcome::Reduced(trace)
}

/// Every applicable step, cycle removals first.
pub fn applicable_steps(g: &DerivationGraph) -> Vec<ReductionStep> {
    let mut out = Vec::new();
    for k in 0..g.len() {
        let ps = g.parents(k);
        for (x, &i) in ps.iter().enumerate() {
            for &j in &ps[x + 1..] {
                let mut union = g.label(i, k).unwrap().clone();
                union.extend(g.label(j, k).unwrap().iter().cloned());
                for l in 0..k {
                    if union.is_subset(&g.terms(l)) {
                        out.push(ReductionStep::Cr { i, j, k, l });
                    }
                }
            }
        }
    }
    for k in 0..g.len() {
        let ps = g.parents(k);
        for &i in &ps {
            for &j in &ps {
                if i == j {
                    continue;
                }
                let shared = g.label(i, k).unwrap().intersection(g.label(j, k).unwrap());
                for t in shared {
                    out.push(ReductionStep::Tr {
                        i,
                        j,
                        k,
                        t: t.clone(),
                    });
                }
            }
        }
    }
    for (&(i, j), l) in g.arcs() {
        if l.is_empty() {
            out.push(ReductionStep::Ar { i, j });
        }
    }
    out
}

/// Breadth-first search over reduced graphs, so the returned trace is a
/// shortest one. Every step lowers the arc count or the total label size,
/// so the space is finite.
fn reduce_full(g: &DerivationGraph, max_states: usize) -> ReductionOutcome {
    let mut states: Vec<(DerivationGraph, Option<(usize, ReductionStep)>)> = vec![(g.clone(), None)];
    let mut index: HashMap<Arcs, usize> = HashMap::from([(g.arcs().clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        if is_tree_shaped(&states[s].0) {
            let mut steps = Vec::new();
            let mut at = s;
            while let Some((prev, step)) = &states[at].1 {
                steps.push(step.clone());
                at = *prev;
            }
            steps.reverse();
            return ReductionOutcome::Reduced(ReductionTrace {
                initial: g.clone(),
                steps,
            });
        }
        let cur = states[s].0.clone();
        for step in applicable_steps(&cur) {
            let next = apply_step(&cur, &step).expect("step is applicable");
            if index.contains_key(next.arcs()) {
                continue;
            }
            if states.len() >= max_states {
                return ReductionOutcome::Unknown {
                    states: states.len(),
                };
            }
            index.insert(next.arcs().clone(), states.len());
            states.push((next, Some((s, step))));
            queue.push_back(states.len() - 1);
        }
    }
    ReductionOutcome::Irreducible
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub prefixes_checked: usize,
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every prefix of a trace: node decorations are untouched, each
/// node with parents has its frontier equal to the union of its incoming
/// labels, and labels lie in their source's terms. For a complete trace,
/// every non-source node's frontier lies in the terms of an earlier node.
pub fn check_prefix_invariants(trace: &ReductionTrace) -> InvariantReport {
    let mut report = InvariantReport::default();
    let graphs = match trace.graphs() {
        Ok(g) => g,
        Err(e) => {
            report.violations.push(format!("trace does not replay: {e}"));
            return report;
        }
    };
    for (n, g) in graphs.iter().enumerate() {
        report.prefixes_checked += 1;
        if !g.same_nodes(&trace.initial) {
            report.violations.push(format!("prefix {n}: nodes changed"));
        }
        for v in g.label_invariant_violations() {
            report.violations.push(format!("prefix {n}: {v}"));
        }
    }
    let last = graphs.last().unwrap();
    if is_tree_shaped(last) {
        for k in 0..last.len() {
            if last.is_source(k) {
                continue;
            }
            let fr = last.node_frontier(k);
            if !(0..k).any(|m| fr.is_subset(&last.terms(m))) {
                report
                    .violations
                    .push(format!("frontier of X{k} is not within any earlier node"));
            }
        }
    }
    report
}
