//! Terms, atoms, instances, substitutions, rules and knowledge bases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A term. The derived order is Constant < Variable < Null, then by name or ordinal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Constant(Arc<str>),
    Variable(Arc<str>),
    /// A labelled null, identified by its creation ordinal.
    Null(u64),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Constant(Arc::from(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Variable(Arc::from(name))
    }

    pub fn null(ordinal: u64) -> Term {
        Term::Null(ordinal)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Constant(_))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(n) | Term::Variable(n) => f.write_str(n),
            Term::Null(k) => write!(f, "_:n{k}"),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A predicate symbol; identity is the pair (name, arity).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: Arc<str>,
    pub arity: usize,
}

impl Predicate {
    pub fn new(name: &str, arity: usize) -> Predicate {
        Predicate {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<Term>,
}

impl Atom {
    /// Builds an atom; the arity is the number of arguments.
    pub fn new(name: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: Predicate::new(name, args.len()),
            args,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.args.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().filter(|t| t.is_variable())
    }

    pub fn nulls(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().filter(|t| t.is_null())
    }

    pub fn has_variables(&self) -> bool {
        self.args.iter().any(Term::is_variable)
    }

    pub fn has_nulls(&self) -> bool {
        self.args.iter().any(Term::is_null)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Collects the terms of a collection of atoms.
pub fn terms_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Term> {
    atoms
        .into_iter()
        .flat_map(|a| a.args.iter().cloned())
        .collect()
}

/// A finite set of atoms over constants and nulls.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    atoms: BTreeSet<Atom>,
}

impl Instance {
    pub fn new() -> Instance {
        Instance::default()
    }

    /// Builds an instance, rejecting atoms that contain variables.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Result<Instance> {
        let mut inst = Instance::new();
        for a in atoms {
            inst.insert(a)?;
        }
        Ok(inst)
    }

    pub fn insert(&mut self, atom: Atom) -> Result<bool> {
        if atom.has_variables() {
            return Err(Error::VariableInInstance(atom.to_string()));
        }
        Ok(self.atoms.insert(atom))
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    /// Atoms with the given predicate, in term order.
    pub fn with_predicate<'a>(&'a self, pred: &'a Predicate) -> impl Iterator<Item = &'a Atom> {
        let lo = Atom {
            pred: pred.clone(),
            args: Vec::new(),
        };
        self.atoms
            .range((Bound::Included(lo), Bound::Unbounded))
            .take_while(move |a| &a.pred == pred)
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        terms_of(&self.atoms)
    }

    pub fn nulls(&self) -> BTreeSet<Term> {
        self.atoms.iter().flat_map(|a| a.nulls().cloned()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter().filter(|t| t.is_constant()).cloned())
            .collect()
    }

    /// Largest null ordinal occurring in the instance.
    pub fn max_null(&self) -> Option<u64> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Null(k) => Some(*k),
                _ => None,
            })
            .max()
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    pub fn union(&self, other: &Instance) -> Instance {
        Instance {
            atoms: self.atoms.union(&other.atoms).cloned().collect(),
        }
    }

    /// Atoms of `self` not in `other`.
    pub fn difference(&self, other: &Instance) -> Instance {
        Instance {
            atoms: self.atoms.difference(&other.atoms).cloned().collect(),
        }
    }

    pub(crate) fn extend_unchecked(&mut self, atoms: impl IntoIterator<Item = Atom>) {
        for a in atoms {
            debug_assert!(!a.has_variables(), "variable in instance atom {a}");
            self.atoms.insert(a);
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.atoms.iter())
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

/// A partial map on terms. Constants are never in the domain, so they map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(BTreeMap<Term, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Term)>) -> Result<Substitution> {
        let mut s = Substitution::new();
        for (k, v) in pairs {
            s.bind(k, v)?;
        }
        Ok(s)
    }

    /// Binds a variable or null. Rebinding to a different image is an error.
    pub fn bind(&mut self, from: Term, to: Term) -> Result<()> {
        if from.is_constant() {
            if from == to {
                return Ok(());
            }
            return Err(Error::InvalidSubstitution(format!(
                "constant {from} cannot map to {to}"
            )));
        }
        if let Some(old) = self.0.get(&from) {
            if *old != to {
                return Err(Error::InvalidSubstitution(format!(
                    "{from} already maps to {old}"
                )));
            }
            return Ok(());
        }
        self.0.insert(from, to);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, from: Term, to: Term) {
        debug_assert!(!from.is_constant());
        self.0.insert(from, to);
    }

    pub(crate) fn remove(&mut self, t: &Term) {
        self.0.remove(t);
    }

    pub fn get(&self, t: &Term) -> Option<&Term> {
        self.0.get(t)
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.0.contains_key(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Term> {
        self.0.keys()
    }

    /// Image of a term: constants are fixed, unmapped nulls are fixed, unmapped variables fail.
    pub fn apply_term(&self, t: &Term) -> Result<Term> {
        match self.0.get(t) {
            Some(v) => Ok(v.clone()),
            None => match t {
                Term::Variable(n) => Err(Error::UnboundVariable(n.to_string())),
                _ => Ok(t.clone()),
            },
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Result<Atom> {
        Ok(Atom {
            pred: a.pred.clone(),
            args: a
                .args
                .iter()
                .map(|t| self.apply_term(t))
                .collect::<Result<_>>()?,
        })
    }

    /// The images of the given terms that are mapped (or fixed).
    pub fn image<'a>(&self, terms: impl IntoIterator<Item = &'a Term>) -> Result<BTreeSet<Term>> {
        terms.into_iter().map(|t| self.apply_term(t)).collect()
    }

    /// Restriction to the given domain.
    pub fn restrict(&self, domain: &BTreeSet<Term>) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(k, _)| domain.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// True if every binding of `self` is also a binding of `other`.
    pub fn is_restriction_of(&self, other: &Substitution) -> bool {
        self.0.iter().all(|(k, v)| other.0.get(k) == Some(v))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(k, v)| (k.to_string(), v.to_string())))
    }
}

/// Componentwise image of a set of atoms; collapses duplicates.
pub fn apply_substitution<'a>(
    atoms: impl IntoIterator<Item = &'a Atom>,
    s: &Substitution,
) -> Result<BTreeSet<Atom>> {
    atoms.into_iter().map(|a| s.apply_atom(a)).collect()
}

fn dedup_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = BTreeSet::new();
    atoms
        .into_iter()
        .filter(|a| seen.insert(a.clone()))
        .collect()
}

/// An existential rule `body -> exists existentials. head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    id: Arc<str>,
    body: Vec<Atom>,
    head: Vec<Atom>,
    frontier: BTreeSet<Term>,
    existentials: Vec<Term>,
}

impl Rule {
    pub fn new(id: &str, body: Vec<Atom>, head: Vec<Atom>) -> Result<Rule> {
        if body.is_empty() {
            return Err(Error::EmptyBody(id.to_string()));
        }
        if head.is_empty() {
            return Err(Error::EmptyHead(id.to_string()));
        }
        if let Some(a) = body.iter().chain(&head).find(|a| a.has_nulls()) {
            return Err(Error::InvalidRule {
                rule: id.to_string(),
                reason: format!("atom {a} contains a null"),
            });
        }
        let body = dedup_atoms(body);
        let head = dedup_atoms(head);
        let body_vars: BTreeSet<Term> = body.iter().flat_map(|a| a.variables().cloned()).collect();
        let mut frontier = BTreeSet::new();
        let mut existentials = Vec::new();
        for v in head.iter().flat_map(|a| a.variables()) {
            if body_vars.contains(v) {
                frontier.insert(v.clone());
            } else if !existentials.contains(v) {
                existentials.push(v.clone());
            }
        }
        Ok(Rule {
            id: Arc::from(id),
            body,
            head,
            frontier,
            existentials,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &[Atom] {
        &self.head
    }

    /// Variables shared by body and head.
    pub fn frontier(&self) -> &BTreeSet<Term> {
        &self.frontier
    }

    /// Head-only variables, in order of first occurrence in the head.
    pub fn existentials(&self) -> &[Term] {
        &self.existentials
    }

    pub fn body_variables(&self) -> BTreeSet<Term> {
        self.body
            .iter()
            .flat_map(|a| a.variables().cloned())
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.body
            .iter()
            .chain(&self.head)
            .flat_map(|a| a.args.iter().filter(|t| t.is_constant()).cloned())
            .collect()
    }

    /// Body atoms that contain at least one frontier variable.
    pub fn frontier_atoms(&self) -> Vec<&Atom> {
        self.body
            .iter()
            .filter(|a| a.args.iter().any(|t| self.frontier.contains(t)))
            .collect()
    }

    /// Head atoms that contain at least one frontier variable.
    pub fn head_frontier_atoms(&self) -> Vec<&Atom> {
        self.head
            .iter()
            .filter(|a| a.args.iter().any(|t| self.frontier.contains(t)))
            .collect()
    }

    /// Variables and constants of the head.
    pub fn head_terms(&self) -> BTreeSet<Term> {
        terms_of(&self.head)
    }
}

fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        write_atoms(f, &self.body)?;
        f.write_str(" -> ")?;
        write_atoms(f, &self.head)?;
        f.write_str(".")
    }
}

/// A Boolean conjunctive query; all its variables are existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanQuery {
    pub name: String,
    pub atoms: Vec<Atom>,
}

impl BooleanQuery {
    pub fn new(name: &str, atoms: Vec<Atom>) -> Result<BooleanQuery> {
        if atoms.is_empty() {
            return Err(Error::InvalidRule {
                rule: name.to_string(),
                reason: "query has no atoms".into(),
            });
        }
        if let Some(a) = atoms.iter().find(|a| a.has_nulls()) {
            return Err(Error::InvalidRule {
                rule: name.to_string(),
                reason: format!("query atom {a} contains a null"),
            });
        }
        Ok(BooleanQuery {
            name: name.to_string(),
            atoms: dedup_atoms(atoms),
        })
    }
}

impl fmt::Display for BooleanQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}: ", self.name)?;
        write_atoms(f, &self.atoms)?;
        f.write_str(".")
    }
}

/// Checks that every predicate name is used with a single arity.
pub fn check_signature<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Result<()> {
    let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
    for a in atoms {
        match arities.get(&*a.pred.name) {
            Some(&n) if n != a.pred.arity => {
                return Err(Error::ArityMismatch {
                    name: a.pred.name.to_string(),
                    first: n,
                    second: a.pred.arity,
                })
            }
            Some(_) => {}
            None => {
                arities.insert(&a.pred.name, a.pred.arity);
            }
        }
    }
    Ok(())
}

/// A database together with an ordered rule set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeBase {
    database: Instance,
    rules: Vec<Rule>,
    constants: BTreeSet<Term>,
}

impl KnowledgeBase {
    pub fn new(database: Instance, rules: Vec<Rule>) -> Result<KnowledgeBase> {
        if let Some(a) = database.iter().find(|a| a.has_nulls()) {
            return Err(Error::InvalidKnowledgeBase(format!(
                "database atom {a} is not ground"
            )));
        }
        let mut ids = BTreeSet::new();
        for r in &rules {
            if !ids.insert(r.id()) {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "duplicate rule id {}",
                    r.id()
                )));
            }
        }
        check_signature(
            database
                .iter()
                .chain(rules.iter().flat_map(|r| r.body().iter().chain(r.head()))),
        )?;
        let mut constants = database.constants();
        for r in &rules {
            constants.extend(r.constants());
        }
        Ok(KnowledgeBase {
            database,
            rules,
            constants,
        })
    }

    pub fn database(&self) -> &Instance {
        &self.database
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// All constants of the database and the rules.
    pub fn constants(&self) -> &BTreeSet<Term> {
        &self.constants
    }

    pub fn rule_index(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.id() == id)
    }

    /// A copy with a different database.
    pub fn with_database(&self, database: Instance) -> Result<KnowledgeBase> {
        KnowledgeBase::new(database, self.rules.clone())
    }
}

/// Fresh-null allocator. Confined to one thread; clone it to fork a branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullGen {
    next: u64,
}

impl Default for NullGen {
    fn default() -> Self {
        NullGen { next: 1 }
    }
}

impl NullGen {
    pub fn new() -> NullGen {
        NullGen::default()
    }

    /// An allocator whose nulls do not occur in `inst`.
    pub fn after(inst: &Instance) -> NullGen {
        NullGen {
            next: inst.max_null().map_or(1, |k| k + 1),
        }
    }

    /// Moves the counter past every null of `inst`.
    pub fn skip_past(&mut self, inst: &Instance) {
        if let Some(k) = inst.max_null() {
            self.next = self.next.max(k + 1);
        }
    }

    pub fn fresh(&mut self) -> Term {
        let t = Term::Null(self.next);
        self.next += 1;
        t
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// Resource caps shared by the search procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_atoms: usize,
    pub max_derivations: usize,
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_atoms: 100_000,
            max_derivations: 1_000_000,
            max_states: 100_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }

    #[test]
    fn term_order() {
        assert!(c("z") < v("a"));
        assert!(v("z") < Term::null(0));
        assert!(Term::null(2) < Term::null(10));
        assert_eq!(Term::null(3).to_string(), "_:n3");
    }

    #[test]
    fn frontier_and_existentials() {
        let r = Rule::new(
            "r4",
            vec![
                Atom::new("q", vec![v("X"), v("Y"), v("Z")]),
                Atom::new("s", vec![v("W"), v("U"), v("V")]),
            ],
            vec![Atom::new("t", vec![v("X"), v("Y"), v("W"), v("U"), v("O")])],
        )
        .unwrap();
        let fr: BTreeSet<_> = ["X", "Y", "W", "U"].iter().map(|n| v(n)).collect();
        assert_eq!(r.frontier(), &fr);
        assert_eq!(r.existentials(), &[v("O")]);

        let r = Rule::new(
            "e",
            vec![Atom::new("p", vec![v("X")])],
            vec![Atom::new("q", vec![v("Y")])],
        )
        .unwrap();
        assert!(r.frontier().is_empty());
        assert!(r.frontier_atoms().is_empty());
    }

    #[test]
    fn frontier_atoms_of_r3() {
        let r = Rule::new(
            "r3",
            vec![
                Atom::new("r", vec![v("X"), v("Y")]),
                Atom::new("q", vec![v("Z"), v("X")]),
            ],
            vec![Atom::new("s", vec![v("X"), v("Y")])],
        )
        .unwrap();
        assert_eq!(r.frontier_atoms().len(), 2);
    }

    #[test]
    fn empty_sides_rejected() {
        let a = Atom::new("p", vec![v("X")]);
        assert!(matches!(
            Rule::new("r", vec![], vec![a.clone()]),
            Err(Error::EmptyBody(_))
        ));
        assert!(matches!(
            Rule::new("r", vec![a], vec![]),
            Err(Error::EmptyHead(_))
        ));
    }

    #[test]
    fn substitution_application() {
        let s = Substitution::from_pairs([(v("X"), c("a")), (v("Y"), c("a"))]).unwrap();
        let atoms = [
            Atom::new("p", vec![v("X"), v("Y")]),
            Atom::new("p", vec![v("Y"), v("X")]),
        ];
        let img = apply_substitution(&atoms, &s).unwrap();
        assert_eq!(img.len(), 1);
        assert!(img.contains(&Atom::new("p", vec![c("a"), c("a")])));

        let empty = Substitution::new();
        assert!(matches!(
            apply_substitution(&atoms, &empty),
            Err(Error::UnboundVariable(_))
        ));
        let ground = [Atom::new("p", vec![c("a")])];
        assert_eq!(
            apply_substitution(&ground, &empty).unwrap(),
            ground.iter().cloned().collect()
        );
    }

    #[test]
    fn constants_are_fixed() {
        let mut s = Substitution::new();
        assert!(s.bind(c("a"), c("a")).is_ok());
        assert!(s.bind(c("a"), c("b")).is_err());
        assert!(s.is_empty());
    }

    #[test]
    fn instances_reject_variables() {
        assert!(Instance::from_atoms([Atom::new("p", vec![v("X")])]).is_err());
    }

    #[test]
    fn predicate_index() {
        let inst = Instance::from_atoms([
            Atom::new("p", vec![c("a")]),
            Atom::new("q", vec![c("a"), c("b")]),
            Atom::new("q", vec![c("b"), Term::null(1)]),
            Atom::new("r", vec![c("b")]),
        ])
        .unwrap();
        let q = Predicate::new("q", 2);
        assert_eq!(inst.with_predicate(&q).count(), 2);
        assert_eq!(inst.with_predicate(&Predicate::new("q", 1)).count(), 0);
        assert_eq!(inst.max_null(), Some(1));
    }

    #[test]
    fn kb_constants_and_signature() {
        let db = Instance::from_atoms([Atom::new("p", vec![c("a")])]).unwrap();
        let r = Rule::new(
            "r",
            vec![Atom::new("p", vec![v("X")])],
            vec![Atom::new("q", vec![v("X"), c("k")])],
        )
        .unwrap();
        let kb = KnowledgeBase::new(db.clone(), vec![r]).unwrap();
        assert_eq!(kb.constants().len(), 2);

        let bad = Rule::new(
            "b",
            vec![Atom::new("p", vec![v("X"), v("Y")])],
            vec![Atom::new("q", vec![v("X"), v("Y")])],
        )
        .unwrap();
        assert!(matches!(
            KnowledgeBase::new(db, vec![bad]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn null_generator() {
        let inst = Instance::from_atoms([Atom::new("p", vec![Term::null(4)])]).unwrap();
        let mut g = NullGen::after(&inst);
        assert_eq!(g.fresh(), Term::null(5));
        let mut g = NullGen::new();
        assert_eq!(g.fresh(), Term::null(1));
    }
}
