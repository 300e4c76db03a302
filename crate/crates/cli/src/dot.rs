//! Graphviz output for derivation graphs.

use std::collections::BTreeSet;
use std::fmt::Write;

use derivgraph::graph::DerivationGraph;
use derivgraph::Term;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn set<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|t| t.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Nodes in index order captioned `X<i>: {atoms}`, arcs in (source, target)
/// order captioned with their sorted label.
pub fn to_dot(g: &DerivationGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for n in g.nodes() {
        let caption = format!("X{}: {}", n.index, set(&n.atoms));
        writeln!(out, "  X{} [label=\"{}\"];", n.index, escape(&caption)).unwrap();
    }
    for (&(i, j), label) in g.arcs() {
        let label: &BTreeSet<Term> = label;
        writeln!(out, "  X{i} -> X{j} [label=\"{}\"];", escape(&set(label))).unwrap();
    }
    out.push_str("}\n");
    out
}
