//! Derivation graphs: one node per derivation step, arcs recording which
//! earlier nodes supply the atoms matched by a step's frontier atoms.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::chase::{Derivation, Trigger};
use crate::error::{Error, Result};
use crate::model::{terms_of, Atom, Instance, KnowledgeBase, Term};
use crate::treedecomp::width_bound;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub index: usize,
    /// The atoms decorating the node: the database for `X0`, the head image
    /// of the step otherwise.
    pub atoms: BTreeSet<Atom>,
    /// Rule id of the step that created the node.
    pub rule: Option<String>,
    #[serde(skip)]
    pub trigger: Option<Trigger>,
    /// Non-constant terms of the step's frontier image.
    pub frontier_image: BTreeSet<Term>,
}

pub type Arcs = BTreeMap<(usize, usize), BTreeSet<Term>>;

/// A (possibly reduced) derivation graph. Reductions only change the arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationGraph {
    nodes: Arc<Vec<Node>>,
    constants: Arc<BTreeSet<Term>>,
    arcs: Arcs,
}

/// Builds the derivation graph of `d`, which must start from the database of `kb`.
pub fn build_derivation_graph(d: &Derivation, kb: &KnowledgeBase) -> DerivationGraph {
    let rules = kb.rules();
    let c = kb.constants();
    let mut nodes = vec![Node {
        index: 0,
        atoms: d.initial().atoms().clone(),
        rule: None,
        trigger: None,
        frontier_image: BTreeSet::new(),
    }];
    let mut arcs = Arcs::new();
    for j in 1..=d.len() {
        let t = &d.step(j).trigger;
        let rule = &rules[t.rule];
        for a in rule.frontier_atoms() {
            let img = t.hom.apply_atom(a).expect("valid trigger");
            let label: BTreeSet<Term> = a
                .variables()
                .filter(|v| rule.frontier().contains(*v))
                .map(|v| t.hom.get(v).cloned().expect("valid trigger"))
                .filter(|x| !c.contains(x))
                .collect();
            for n in nodes.iter().filter(|n| n.atoms.contains(&img)) {
                arcs.entry((n.index, j))
                    .or_default()
                    .extend(label.iter().cloned());
            }
        }
        nodes.push(Node {
            index: j,
            atoms: t.head_image(rule).into_iter().collect(),
            rule: Some(rule.id().to_string()),
            trigger: Some(t.clone()),
            frontier_image: t
                .frontier_image(rule)
                .into_iter()
                .filter(|x| !c.contains(x))
                .collect(),
        });
    }
    DerivationGraph {
        nodes: Arc::new(nodes),
        constants: Arc::new(c.clone()),
        arcs,
    }
}

impl DerivationGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn constants(&self) -> &BTreeSet<Term> {
        &self.constants
    }

    pub fn arcs(&self) -> &Arcs {
        &self.arcs
    }

    pub(crate) fn arcs_mut(&mut self) -> &mut Arcs {
        &mut self.arcs
    }

    /// True if both graphs share the same node decoration.
    pub fn same_nodes(&self, other: &DerivationGraph) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes == other.nodes
    }

    pub fn label(&self, i: usize, j: usize) -> Option<&BTreeSet<Term>> {
        self.arcs.get(&(i, j))
    }

    pub fn parents(&self, k: usize) -> Vec<usize> {
        self.arcs
            .keys()
            .filter(|&&(_, b)| b == k)
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn children(&self, k: usize) -> Vec<usize> {
        self.arcs
            .keys()
            .filter(|&&(a, _)| a == k)
            .map(|&(_, b)| b)
            .collect()
    }

    pub fn is_source(&self, k: usize) -> bool {
        !self.arcs.keys().any(|&(_, b)| b == k)
    }

    /// `terms(X_i)`: the terms of the node's atoms together with all constants.
    pub fn terms(&self, i: usize) -> BTreeSet<Term> {
        let mut t = terms_of(&self.nodes[i].atoms);
        t.extend(self.constants.iter().cloned());
        t
    }

    /// Terms of the node's atoms that are not constants of the knowledge base.
    pub fn non_constant_terms(&self, i: usize) -> BTreeSet<Term> {
        terms_of(&self.nodes[i].atoms)
            .into_iter()
            .filter(|t| !self.constants.contains(t))
            .collect()
    }

    /// The node frontier: empty for sources, else the non-constant frontier image.
    pub fn node_frontier(&self, k: usize) -> BTreeSet<Term> {
        if self.is_source(k) {
            BTreeSet::new()
        } else {
            self.nodes[k].frontier_image.clone()
        }
    }

    /// The first node whose non-constant terms contain `x`.
    pub fn x_generative_node(&self, x: &Term) -> Result<usize> {
        (0..self.len())
            .find(|&n| !self.constants.contains(x) && terms_of(&self.nodes[n].atoms).contains(x))
            .ok_or_else(|| Error::UnknownTerm(x.to_string()))
    }

    /// All non-constant terms occurring in some node.
    pub fn all_non_constant_terms(&self) -> BTreeSet<Term> {
        (0..self.len())
            .flat_map(|i| self.non_constant_terms(i))
            .collect()
    }

    /// Union of the labels of the arcs entering `k`.
    pub fn incoming_label_union(&self, k: usize) -> BTreeSet<Term> {
        self.arcs
            .iter()
            .filter(|((_, b), _)| *b == k)
            .flat_map(|(_, l)| l.iter().cloned())
            .collect()
    }

    /// Violations of: a node with parents has its frontier equal to the
    /// union of its incoming labels; every label lies in its source's terms;
    /// labels hold no constants; arcs point forward.
    pub fn label_invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (&(i, j), l) in &self.arcs {
            if i >= j {
                out.push(format!("arc ({i},{j}) points backwards"));
            }
            if l.iter().any(|t| self.constants.contains(t) || t.is_variable()) {
                out.push(format!("label of ({i},{j}) has a constant or variable"));
            }
            let src = self.terms(i);
            if !l.is_subset(&src) {
                out.push(format!("label of ({i},{j}) is not within terms(X{i})"));
            }
        }
        for k in 0..self.len() {
            if !self.is_source(k) && self.node_frontier(k) != self.incoming_label_union(k) {
                out.push(format!(
                    "frontier of X{k} differs from the union of its incoming labels"
                ));
            }
        }
        out
    }

    /// Violations of: every node containing `x` is reached from the
    /// x-generative node by a directed path through nodes that contain `x`
    /// and have index at most that node's index.
    pub fn generative_path_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for x in self.all_non_constant_terms() {
            let g = self.x_generative_node(&x).expect("x occurs");
            let holders: BTreeSet<usize> = (0..self.len())
                .filter(|&n| self.non_constant_terms(n).contains(&x))
                .collect();
            for &k in &holders {
                let mut seen = BTreeSet::from([g]);
                let mut queue = VecDeque::from([g]);
                while let Some(a) = queue.pop_front() {
                    for b in self.children(a) {
                        if b <= k && holders.contains(&b) && seen.insert(b) {
                            queue.push_back(b);
                        }
                    }
                }
                if !seen.contains(&k) {
                    out.push(format!("no {x}-path from X{g} to X{k}"));
                }
            }
        }
        out
    }

    fn connected_within(&self, nodes: &BTreeSet<usize>) -> bool {
        let Some(&start) = nodes.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &(i, j) in self.arcs.keys() {
                let other = if i == a {
                    j
                } else if j == a {
                    i
                } else {
                    continue;
                };
                if nodes.contains(&other) && seen.insert(other) {
                    queue.push_back(other);
                }
            }
        }
        seen.len() == nodes.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub term_cover: bool,
    pub atom_cover: bool,
    pub connected: bool,
    pub bounded: bool,
    pub bound: usize,
    pub max_node_terms: usize,
    pub violations: Vec<String>,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the four decomposition properties of a (reduced) derivation graph
/// against the final instance of its derivation.
pub fn check_decomposition_properties(
    g: &DerivationGraph,
    final_instance: &Instance,
    kb: &KnowledgeBase,
) -> DecompositionReport {
    let mut violations = Vec::new();
    let all_terms: BTreeSet<Term> = (0..g.len()).flat_map(|i| g.terms(i)).collect();
    let mut expected = final_instance.terms();
    expected.extend(kb.constants().iter().cloned());
    let term_cover = all_terms == expected;
    if !term_cover {
        violations.push("node terms do not cover exactly the instance terms".into());
    }
    let all_atoms: BTreeSet<&Atom> = g.nodes().iter().flat_map(|n| n.atoms.iter()).collect();
    let atom_cover = final_instance.iter().all(|a| all_atoms.contains(a))
        && all_atoms.iter().all(|a| final_instance.contains(a));
    if !atom_cover {
        violations.push("node atoms do not cover exactly the instance atoms".into());
    }
    let mut connected = true;
    for x in g.all_non_constant_terms() {
        let holders: BTreeSet<usize> = (0..g.len())
            .filter(|&n| g.non_constant_terms(n).contains(&x))
            .collect();
        if !g.connected_within(&holders) {
            connected = false;
            violations.push(format!("nodes containing {x} are not connected"));
        }
    }
    let bound = width_bound(kb);
    let max_node_terms = (0..g.len()).map(|i| g.terms(i).len()).max().unwrap_or(0);
    let bounded = max_node_terms <= bound;
    if !bounded {
        violations.push(format!("a node has {max_node_terms} terms, bound {bound}"));
    }
    DecompositionReport {
        term_cover,
        atom_cover,
        connected,
        bounded,
        bound,
        max_node_terms,
        violations,
    }
}
