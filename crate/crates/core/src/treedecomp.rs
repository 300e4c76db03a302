//! Tree decompositions read off cycle-free derivation graphs.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DerivationGraph;
use crate::model::{Instance, KnowledgeBase, Term};
use crate::reduce::is_cycle_free;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<Term>>,
    /// Undirected tree edges between bag indices.
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl TreeDecomposition {
    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.max_bag().saturating_sub(1)
    }

    pub fn max_bag(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    fn neighbours(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(x, y)| {
            if x == b {
                Some(y)
            } else if y == b {
                Some(x)
            } else {
                None
            }
        })
    }

    fn connected_within(&self, nodes: &BTreeSet<usize>) -> bool {
        let Some(&start) = nodes.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in self.neighbours(a) {
                if nodes.contains(&b) && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        seen.len() == nodes.len()
    }

    /// The edges form a single tree over the bags.
    pub fn is_tree(&self) -> bool {
        let n = self.bags.len();
        if n == 0 {
            return self.edges.is_empty();
        }
        self.edges.len() == n - 1
            && self.edges.iter().all(|&(a, b)| a < n && b < n)
            && self.root < n
            && self.connected_within(&(0..n).collect())
    }
}

/// One bag per node, the arcs as tree edges, and the forest's trees chained
/// root to root in node order (each root being the tree's smallest node).
pub fn extract_tree_decomposition(g: &DerivationGraph) -> Result<TreeDecomposition> {
    if !is_cycle_free(g) {
        return Err(Error::NotCycleFree);
    }
    let bags: Vec<BTreeSet<Term>> = (0..g.len()).map(|i| g.terms(i)).collect();
    let mut edges: Vec<(usize, usize)> = g.arcs().keys().copied().collect();
    let mut comp = vec![usize::MAX; g.len()];
    let mut roots = Vec::new();
    for start in 0..g.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        roots.push(start);
        comp[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &(i, j) in g.arcs().keys() {
                let other = if i == a {
                    j
                } else if j == a {
                    i
                } else {
                    continue;
                };
                if comp[other] == usize::MAX {
                    comp[other] = start;
                    queue.push_back(other);
                }
            }
        }
    }
    edges.extend(roots.windows(2).map(|w| (w[0], w[1])));
    Ok(TreeDecomposition {
        bags,
        edges,
        root: 0,
    })
}

/// Checks that the bags cover the instance's terms, every atom fits in a
/// bag, and the bags holding any term form a connected subtree.
pub fn validate_tree_decomposition(td: &TreeDecomposition, instance: &Instance) -> bool {
    if !td.is_tree() {
        return false;
    }
    let all: BTreeSet<&Term> = td.bags.iter().flatten().collect();
    if !instance.terms().iter().all(|t| all.contains(t)) {
        return false;
    }
    let atoms_fit = instance.iter().all(|a| {
        td.bags
            .iter()
            .any(|b| a.args.iter().all(|t| b.contains(t)))
    });
    atoms_fit
        && all.iter().all(|t| {
            let holders = (0..td.bags.len())
                .filter(|&i| td.bags[i].contains(*t))
                .collect();
            td.connected_within(&holders)
        })
}

/// `max{|terms(D)|, max over rules of |terms(head)|} + |C|`.
pub fn width_bound(kb: &KnowledgeBase) -> usize {
    let db = kb.database().terms().len();
    let heads = kb
        .rules()
        .iter()
        .map(|r| r.head_terms().len())
        .max()
        .unwrap_or(0);
    db.max(heads) + kb.constants().len()
}
