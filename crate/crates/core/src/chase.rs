//! Rule application, the parallel chase and derivation enumeration.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom::find_homomorphisms;
use crate::model::{Atom, Instance, Limits, NullGen, Rule, Substitution, Term};

/// A rule application: the body match and its extension to the existentials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Trigger {
    /// Index of the rule in the rule set.
    pub rule: usize,
    pub hom: Substitution,
    pub extension: Substitution,
}

impl Trigger {
    /// The head atoms produced by this trigger.
    pub fn head_image(&self, rule: &Rule) -> Vec<Atom> {
        rule.head()
            .iter()
            .map(|a| {
                self.extension
                    .apply_atom(a)
                    .expect("extension binds every head variable")
            })
            .collect()
    }

    /// The image of the rule's frontier.
    pub fn frontier_image(&self, rule: &Rule) -> BTreeSet<Term> {
        rule.frontier()
            .iter()
            .map(|v| self.hom.get(v).cloned().expect("hom binds the frontier"))
            .collect()
    }

    /// Nulls introduced for the existential variables.
    pub fn fresh_nulls(&self, rule: &Rule) -> BTreeSet<Term> {
        rule.existentials()
            .iter()
            .filter_map(|v| self.extension.get(v).cloned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub trigger: Trigger,
    /// The instance after this step.
    pub instance: Instance,
}

/// A sequence of rule applications starting from an initial instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    initial: Instance,
    steps: Vec<Step>,
}

impl Derivation {
    pub fn new(initial: Instance) -> Derivation {
        Derivation {
            initial,
            steps: Vec::new(),
        }
    }

    /// Rebuilds a derivation from recorded parts; use [`Derivation::validate`] to check it.
    pub fn from_parts(initial: Instance, steps: Vec<Step>) -> Derivation {
        Derivation { initial, steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn initial(&self) -> &Instance {
        &self.initial
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Step `i`, counted from 1.
    pub fn step(&self, i: usize) -> &Step {
        &self.steps[i - 1]
    }

    /// Instance `I_i` for `0 <= i <= len`.
    pub fn instance(&self, i: usize) -> &Instance {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].instance
        }
    }

    pub fn final_instance(&self) -> &Instance {
        self.instance(self.len())
    }

    /// An allocator whose nulls are fresh for the whole derivation.
    pub fn null_gen(&self) -> NullGen {
        NullGen::after(self.final_instance())
    }

    /// Appends the application of `rules[rule]` under `hom` to the final instance.
    pub fn apply(
        &mut self,
        rules: &[Rule],
        rule: usize,
        hom: &Substitution,
        nulls: &mut NullGen,
    ) -> Result<()> {
        let (instance, trigger) = apply_rule(self.final_instance(), rules, rule, hom, nulls)?;
        self.steps.push(Step { trigger, instance });
        Ok(())
    }

    /// Rule ids of the steps.
    pub fn rule_ids<'a>(&self, rules: &'a [Rule]) -> Vec<&'a str> {
        self.steps
            .iter()
            .map(|s| rules[s.trigger.rule].id())
            .collect()
    }

    /// Checks every derivation invariant against `rules`.
    pub fn validate(&self, rules: &[Rule]) -> Result<()> {
        let bad = |step: usize, reason: String| Err(Error::InvalidDerivation { step, reason });
        if let Some(a) = self.initial.iter().find(|a| a.has_variables()) {
            return bad(0, format!("initial atom {a} has a variable"));
        }
        for i in 1..=self.len() {
            let prev = self.instance(i - 1);
            let step = self.step(i);
            let t = &step.trigger;
            let Some(rule) = rules.get(t.rule) else {
                return bad(i, format!("rule index {} out of range", t.rule));
            };
            let body_vars = rule.body_variables();
            if t.hom.domain().cloned().collect::<BTreeSet<_>>() != body_vars {
                return bad(i, "hom is not defined exactly on the body variables".into());
            }
            for a in rule.body() {
                let img = t.hom.apply_atom(a)?;
                if !prev.contains(&img) {
                    return bad(i, format!("body atom {img} not in previous instance"));
                }
            }
            if !t.hom.is_restriction_of(&t.extension) {
                return bad(i, "extension does not extend hom".into());
            }
            let prev_terms = prev.terms();
            let mut fresh = BTreeSet::new();
            for z in rule.existentials() {
                match t.extension.get(z) {
                    Some(n @ Term::Null(_)) if !prev_terms.contains(n) && fresh.insert(n) => {}
                    _ => return bad(i, format!("existential {z} not mapped to a fresh null")),
                }
            }
            if t.extension.len() != body_vars.len() + rule.existentials().len() {
                return bad(i, "extension binds extra terms".into());
            }
            let mut expected = prev.clone();
            expected.extend_unchecked(t.head_image(rule));
            if expected != step.instance {
                return bad(i, "instance differs from the rule application".into());
            }
        }
        Ok(())
    }
}

/// All triggers of `rule` in `instance`, in substitution order.
pub fn triggers(instance: &Instance, rule: &Rule) -> Vec<Substitution> {
    find_homomorphisms(rule.body(), instance, &Substitution::new(), None)
}

/// All triggers of a rule set, in rule order then substitution order.
pub fn all_triggers(instance: &Instance, rules: &[Rule]) -> Vec<(usize, Substitution)> {
    rules
        .iter()
        .enumerate()
        .flat_map(|(i, r)| triggers(instance, r).into_iter().map(move |h| (i, h)))
        .collect()
}

fn extend_trigger(
    instance: &Instance,
    rules: &[Rule],
    rule: usize,
    hom: &Substitution,
    nulls: &mut NullGen,
) -> Result<Trigger> {
    let r = rules
        .get(rule)
        .ok_or_else(|| Error::UnknownRule(format!("#{rule}")))?;
    let body_vars = r.body_variables();
    let hom = hom.restrict(&body_vars);
    for v in &body_vars {
        if !hom.contains(v) {
            return Err(Error::UnboundVariable(v.to_string()));
        }
    }
    for a in r.body() {
        if !instance.contains(&hom.apply_atom(a)?) {
            return Err(Error::NotTriggered(r.id().to_string()));
        }
    }
    nulls.skip_past(instance);
    let mut extension = hom.clone();
    for z in r.existentials() {
        extension.insert_unchecked(z.clone(), nulls.fresh());
    }
    Ok(Trigger {
        rule,
        hom,
        extension,
    })
}

/// `Ch(I, rule, hom)`: adds the head image with fresh nulls for the existentials.
pub fn apply_rule(
    instance: &Instance,
    rules: &[Rule],
    rule: usize,
    hom: &Substitution,
    nulls: &mut NullGen,
) -> Result<(Instance, Trigger)> {
    let trigger = extend_trigger(instance, rules, rule, hom, nulls)?;
    let mut out = instance.clone();
    out.extend_unchecked(trigger.head_image(&rules[rule]));
    Ok((out, trigger))
}

/// `Ch_1`: applies every trigger of the input instance in parallel, each with its own nulls.
pub fn one_step(
    instance: &Instance,
    rules: &[Rule],
    nulls: &mut NullGen,
    limits: &Limits,
) -> Result<Instance> {
    let mut out = instance.clone();
    for (rule, hom) in all_triggers(instance, rules) {
        let t = extend_trigger(instance, rules, rule, &hom, nulls)?;
        out.extend_unchecked(t.head_image(&rules[rule]));
        if out.len() > limits.max_atoms {
            return Err(Error::ResourceLimit(format!(
                "instance exceeds {} atoms",
                limits.max_atoms
            )));
        }
    }
    Ok(out)
}

/// `Ch_0, ..., Ch_k`.
pub fn chase_levels(
    db: &Instance,
    rules: &[Rule],
    k: usize,
    limits: &Limits,
) -> Result<Vec<Instance>> {
    let mut nulls = NullGen::after(db);
    let mut levels = vec![db.clone()];
    for _ in 0..k {
        let next = one_step(levels.last().unwrap(), rules, &mut nulls, limits)?;
        levels.push(next);
    }
    Ok(levels)
}

/// `Ch_k`: the k-fold parallel chase.
pub fn chase_k(db: &Instance, rules: &[Rule], k: usize, limits: &Limits) -> Result<Instance> {
    Ok(chase_levels(db, rules, k, limits)?.pop().unwrap())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dedup {
    #[default]
    None,
    ModNulls,
}

#[derive(Clone, Debug)]
pub struct EnumOptions {
    pub max_len: usize,
    pub dedup: Dedup,
    /// Skip steps whose head image is already present.
    pub skip_redundant: bool,
    pub limits: Limits,
}

impl EnumOptions {
    pub fn new(max_len: usize) -> EnumOptions {
        EnumOptions {
            max_len,
            dedup: Dedup::None,
            skip_redundant: false,
            limits: Limits::default(),
        }
    }

    pub fn dedup(mut self, dedup: Dedup) -> EnumOptions {
        self.dedup = dedup;
        self
    }

    pub fn skip_redundant(mut self, on: bool) -> EnumOptions {
        self.skip_redundant = on;
        self
    }

    pub fn limits(mut self, limits: Limits) -> EnumOptions {
        self.limits = limits;
        self
    }
}

/// Key identifying a derivation up to a renaming of its nulls.
fn canonical_key(d: &Derivation) -> Vec<(usize, Vec<(Term, Term)>)> {
    let mut names: BTreeMap<Term, Term> = BTreeMap::new();
    let mut rename = |t: &Term| -> Term {
        if !t.is_null() {
            return t.clone();
        }
        let k = names.len() as u64 + 1;
        names.entry(t.clone()).or_insert(Term::Null(k)).clone()
    };
    let mut key = Vec::with_capacity(d.len() + 1);
    let init: Vec<(Term, Term)> = d
        .initial()
        .nulls()
        .iter()
        .map(|n| (n.clone(), rename(n)))
        .collect();
    key.push((usize::MAX, init));
    for s in d.steps() {
        let pairs = s
            .trigger
            .extension
            .iter()
            .map(|(k, v)| (k.clone(), rename(v)))
            .collect();
        key.push((s.trigger.rule, pairs));
    }
    key
}

/// Depth-first, pre-order enumeration of all derivations up to a length.
///
/// Children follow trigger order (rule order, then substitution order), so
/// the position of a derivation in the stream is reproducible.
pub struct DerivationIter<'a> {
    rules: &'a [Rule],
    opts: EnumOptions,
    stack: Vec<(Derivation, NullGen)>,
    seen: HashSet<Vec<(usize, Vec<(Term, Term)>)>>,
    emitted: usize,
    failed: bool,
}

impl<'a> DerivationIter<'a> {
    fn expand(&self, d: &Derivation, nulls: &NullGen) -> Result<Vec<(Derivation, NullGen)>> {
        let inst = d.final_instance();
        let mut children = Vec::new();
        for (rule, hom) in all_triggers(inst, self.rules) {
            let mut g = nulls.clone();
            let mut child = d.clone();
            child.apply(self.rules, rule, &hom, &mut g)?;
            if self.opts.skip_redundant && child.final_instance().len() == inst.len() {
                continue;
            }
            if child.final_instance().len() > self.opts.limits.max_atoms {
                return Err(Error::ResourceLimit(format!(
                    "instance exceeds {} atoms",
                    self.opts.limits.max_atoms
                )));
            }
            children.push((child, g));
        }
        Ok(children)
    }
}

impl Iterator for DerivationIter<'_> {
    type Item = Result<Derivation>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let (d, nulls) = self.stack.pop()?;
            if d.len() < self.opts.max_len {
                match self.expand(&d, &nulls) {
                    Ok(children) => self.stack.extend(children.into_iter().rev()),
                    Err(e) => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                }
            }
            if self.opts.dedup == Dedup::ModNulls && !self.seen.insert(canonical_key(&d)) {
                continue;
            }
            if self.emitted >= self.opts.limits.max_derivations {
                self.failed = true;
                return Some(Err(Error::ResourceLimit(format!(
                    "more than {} derivations",
                    self.opts.limits.max_derivations
                ))));
            }
            self.emitted += 1;
            return Some(Ok(d));
        }
    }
}

/// Enumerates every derivation from `db` of length at most `opts.max_len`.
pub fn enumerate_derivations<'a>(
    db: &Instance,
    rules: &'a [Rule],
    opts: EnumOptions,
) -> DerivationIter<'a> {
    DerivationIter {
        rules,
        opts,
        stack: vec![(Derivation::new(db.clone()), NullGen::after(db))],
        seen: HashSet::new(),
        emitted: 0,
        failed: false,
    }
}

/// Collects the enumeration, failing on the first error.
pub fn collect_derivations(
    db: &Instance,
    rules: &[Rule],
    opts: EnumOptions,
) -> Result<Vec<Derivation>> {
    enumerate_derivations(db, rules, opts).collect()
}
