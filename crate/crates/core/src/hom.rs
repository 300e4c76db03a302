//! Homomorphism search between atom sets.
//!
//! Variables and nulls of the source are mappable; constants are fixed.

use std::collections::BTreeSet;

use crate::model::{Atom, Instance, Rule, Substitution, Term};

/// A source atom set to be mapped into a target instance, extending a seed.
#[derive(Clone, Debug)]
pub struct HomSearchProblem<'a> {
    pub source: &'a [Atom],
    pub target: &'a Instance,
    pub seed: Substitution,
}

impl HomSearchProblem<'_> {
    pub fn solve(&self, limit: Option<usize>) -> Vec<Substitution> {
        find_homomorphisms(self.source, self.target, &self.seed, limit)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Variables and nulls map anywhere.
    Hom,
    /// Only nulls are mappable, injectively, onto nulls.
    NullInjection,
}

struct Search<'a> {
    source: Vec<&'a Atom>,
    target: &'a Instance,
    mode: Mode,
    binding: Substitution,
    used: BTreeSet<Term>,
    done: Vec<bool>,
    out: Vec<Substitution>,
    limit: usize,
}

type Bindings = Vec<(Term, Term)>;

impl<'a> Search<'a> {
    fn new(source: &'a [Atom], target: &'a Instance, seed: &Substitution, mode: Mode) -> Self {
        let used = if mode == Mode::NullInjection {
            seed.iter().map(|(_, v)| v.clone()).collect()
        } else {
            BTreeSet::new()
        };
        Search {
            source: source.iter().collect(),
            target,
            mode,
            binding: seed.clone(),
            used,
            done: vec![false; source.len()],
            out: Vec::new(),
            limit: usize::MAX,
        }
    }

    fn mappable(&self, t: &Term) -> bool {
        match self.mode {
            Mode::Hom => !t.is_constant(),
            Mode::NullInjection => t.is_null(),
        }
    }

    fn match_atom(&self, a: &Atom, cand: &Atom) -> Option<Bindings> {
        let mut new: Bindings = Vec::new();
        for (s, t) in a.args.iter().zip(&cand.args) {
            if !self.mappable(s) {
                if s != t {
                    return None;
                }
                continue;
            }
            let cur = self
                .binding
                .get(s)
                .or_else(|| new.iter().find(|(k, _)| k == s).map(|(_, v)| v));
            match cur {
                Some(v) if v == t => {}
                Some(_) => return None,
                None => {
                    if self.mode == Mode::NullInjection
                        && (!t.is_null()
                            || self.used.contains(t)
                            || new.iter().any(|(_, v)| v == t))
                    {
                        return None;
                    }
                    new.push((s.clone(), t.clone()));
                }
            }
        }
        Some(new)
    }

    fn candidates(&self, idx: usize) -> Vec<Bindings> {
        let a = self.source[idx];
        self.target
            .with_predicate(&a.pred)
            .filter_map(|cand| self.match_atom(a, cand))
            .collect()
    }

    /// Returns true when the limit has been reached.
    fn run(&mut self, remaining: usize) -> bool {
        if remaining == 0 {
            self.out.push(self.binding.clone());
            return self.out.len() >= self.limit;
        }
        let mut best: Option<(usize, Vec<Bindings>)> = None;
        for idx in 0..self.source.len() {
            if self.done[idx] {
                continue;
            }
            let c = self.candidates(idx);
            let better = best.as_ref().is_none_or(|(_, b)| c.len() < b.len());
            if better {
                let empty = c.is_empty();
                best = Some((idx, c));
                if empty {
                    break;
                }
            }
        }
        let Some((idx, cands)) = best else {
            return false;
        };
        self.done[idx] = true;
        let mut stop = false;
        for m in cands {
            for (k, v) in &m {
                self.binding.insert_unchecked(k.clone(), v.clone());
                if self.mode == Mode::NullInjection {
                    self.used.insert(v.clone());
                }
            }
            stop = self.run(remaining - 1);
            for (k, v) in &m {
                self.binding.remove(k);
                if self.mode == Mode::NullInjection {
                    self.used.remove(v);
                }
            }
            if stop {
                break;
            }
        }
        self.done[idx] = false;
        stop
    }

    fn solve(mut self, limit: Option<usize>) -> Vec<Substitution> {
        self.limit = limit.unwrap_or(usize::MAX);
        if self.limit == 0 {
            return Vec::new();
        }
        let n = self.source.len();
        self.run(n);
        let mut out = self.out;
        out.sort();
        out.dedup();
        out
    }
}

/// All homomorphisms from `source` into `target` extending `seed`.
///
/// Results are sorted by their mapping. With a limit, the search stops after
/// that many solutions (in search order) and those are returned sorted.
pub fn find_homomorphisms(
    source: &[Atom],
    target: &Instance,
    seed: &Substitution,
    limit: Option<usize>,
) -> Vec<Substitution> {
    Search::new(source, target, seed, Mode::Hom).solve(limit)
}

/// True if some homomorphism maps `source` into `target`.
pub fn maps_into(source: &[Atom], target: &Instance) -> bool {
    !find_homomorphisms(source, target, &Substitution::new(), Some(1)).is_empty()
}

/// True iff every body match of `rule` extends to a head match.
pub fn satisfies_rule(instance: &Instance, rule: &Rule) -> bool {
    find_homomorphisms(rule.body(), instance, &Substitution::new(), None)
        .iter()
        .all(|h| !find_homomorphisms(rule.head(), instance, h, Some(1)).is_empty())
}

fn atoms_vec(i: &Instance) -> Vec<Atom> {
    i.iter().cloned().collect()
}

/// Homomorphisms in both directions, nulls being mappable.
pub fn hom_equivalent(a: &Instance, b: &Instance) -> bool {
    maps_into(&atoms_vec(a), b) && maps_into(&atoms_vec(b), a)
}

/// An injective null renaming `s` with `s(a) ⊆ b`.
pub fn embed_mod_nulls(a: &Instance, b: &Instance) -> Option<Substitution> {
    if a.len() > b.len() {
        return None;
    }
    let src = atoms_vec(a);
    Search::new(&src, b, &Substitution::new(), Mode::NullInjection)
        .solve(Some(1))
        .into_iter()
        .next()
}

/// A bijective null renaming `s` with `s(a) = b`.
pub fn isomorphic_mod_nulls(a: &Instance, b: &Instance) -> Option<Substitution> {
    if a.len() != b.len() || a.nulls().len() != b.nulls().len() || a.constants() != b.constants()
    {
        return None;
    }
    embed_mod_nulls(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn n(k: u64) -> Term {
        Term::null(k)
    }
    fn inst(atoms: Vec<Atom>) -> Instance {
        Instance::from_atoms(atoms).unwrap()
    }

    #[test]
    fn single_match() {
        let d = inst(vec![Atom::new("p", vec![c("a")]), Atom::new("r", vec![c("b")])]);
        let hs = find_homomorphisms(
            &[Atom::new("p", vec![v("X")])],
            &d,
            &Substitution::new(),
            None,
        );
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].get(&v("X")), Some(&c("a")));
    }

    #[test]
    fn repeated_variable_needs_equal_terms() {
        let d = inst(vec![Atom::new("t", vec![c("a"), c("b")])]);
        let hs = find_homomorphisms(
            &[Atom::new("t", vec![v("X"), v("X")])],
            &d,
            &Substitution::new(),
            None,
        );
        assert!(hs.is_empty());
    }

    #[test]
    fn seed_is_respected() {
        let d = inst(vec![
            Atom::new("p", vec![c("a")]),
            Atom::new("p", vec![c("b")]),
        ]);
        let seed = Substitution::from_pairs([(v("X"), c("b"))]).unwrap();
        let hs = find_homomorphisms(&[Atom::new("p", vec![v("X")])], &d, &seed, None);
        assert_eq!(hs, vec![seed]);
    }

    #[test]
    fn rule_satisfaction() {
        let r = Rule::new(
            "r1",
            vec![Atom::new("p", vec![v("X")])],
            vec![Atom::new("q", vec![v("X"), v("Y"), v("Z")])],
        )
        .unwrap();
        let d = inst(vec![Atom::new("p", vec![c("a")]), Atom::new("r", vec![c("b")])]);
        assert!(!satisfies_rule(&d, &r));
        let mut i1 = d.clone();
        i1.insert(Atom::new("q", vec![c("a"), n(1), n(2)])).unwrap();
        assert!(satisfies_rule(&i1, &r));
        assert!(satisfies_rule(&Instance::new(), &r));
    }

    #[test]
    fn equivalence_and_isomorphism() {
        let a = inst(vec![Atom::new("q", vec![c("a"), n(1), n(2)])]);
        let b = inst(vec![
            Atom::new("q", vec![c("a"), n(3), n(4)]),
            Atom::new("q", vec![c("a"), n(5), n(6)]),
        ]);
        assert!(hom_equivalent(&a, &b));
        assert!(isomorphic_mod_nulls(&a, &b).is_none());

        let c7 = inst(vec![Atom::new("q", vec![c("a"), n(7), n(9)])]);
        let s = isomorphic_mod_nulls(&a, &c7).unwrap();
        assert_eq!(s.get(&n(1)), Some(&n(7)));
        assert_eq!(s.get(&n(2)), Some(&n(9)));

        let same = inst(vec![Atom::new("q", vec![c("a"), n(1), n(1)])]);
        let diff = inst(vec![Atom::new("q", vec![c("a"), n(2), n(3)])]);
        assert!(isomorphic_mod_nulls(&same, &diff).is_none());

        let pa = inst(vec![Atom::new("p", vec![c("a")])]);
        let pb = inst(vec![Atom::new("p", vec![c("b")])]);
        assert!(!hom_equivalent(&pa, &pb));
    }

    #[test]
    fn nulls_do_not_map_to_constants_in_isomorphism() {
        let a = inst(vec![Atom::new("p", vec![n(1)]), Atom::new("p", vec![c("a")])]);
        let b = inst(vec![Atom::new("p", vec![c("a")]), Atom::new("p", vec![c("b")])]);
        assert!(isomorphic_mod_nulls(&a, &b).is_none());
    }
}
