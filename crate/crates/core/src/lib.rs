//! Existential-rule chase derivations, their derivation graphs, graph
//! reductions, tree decompositions and bounded class membership checks.

pub mod analysis;
pub mod chase;
pub mod classify;
pub mod error;
pub mod gen;
pub mod graph;
pub mod hom;
pub mod model;
pub mod reduce;
pub mod syntax;
pub mod treedecomp;

pub use error::{Error, Result};
pub use model::{
    apply_substitution, Atom, BooleanQuery, Instance, KnowledgeBase, Limits, NullGen, Predicate,
    Rule, Substitution, Term,
};
