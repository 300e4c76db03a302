//! Bounded membership checks for the greedy and cycle-free derivation graph
//! classes on one database, and Boolean query entailment by the bounded chase.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{find_greedy_rederivation, find_rederivation, is_greedy};
use crate::chase::{chase_levels, enumerate_derivations, Dedup, Derivation, EnumOptions};
use crate::error::{Error, Result};
use crate::graph::build_derivation_graph;
use crate::hom::{isomorphic_mod_nulls, maps_into};
use crate::model::{BooleanQuery, Instance, KnowledgeBase, Limits, Term};
use crate::reduce::{reduce, ReductionOutcome, ReductionTrace, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    /// Every derivation is greedy.
    Gbts,
    /// Every derivable instance has a greedy derivation.
    Wgbts,
    /// Every derivation graph reduces.
    Cdgs,
    /// Every derivable instance has a derivation whose graph reduces.
    Wcdgs,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Gbts, Class::Wgbts, Class::Cdgs, Class::Wcdgs];
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Gbts => "gbts",
            Class::Wgbts => "wgbts",
            Class::Cdgs => "cdgs",
            Class::Wcdgs => "wcdgs",
        })
    }
}

impl FromStr for Class {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gbts" => Ok(Class::Gbts),
            "wgbts" => Ok(Class::Wgbts),
            "cdgs" => Ok(Class::Cdgs),
            "wcdgs" => Ok(Class::Wcdgs),
            _ => Err(format!("unknown class {s}")),
        }
    }
}

/// How long a re-derivation of an instance may be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RederiveBound {
    /// The length of the shortest enumerated derivation of the instance.
    Shortest,
    /// The enumeration depth.
    Depth,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub depth: usize,
    pub dedup: Dedup,
    pub rederive: RederiveBound,
    pub limits: Limits,
}

impl ClassifyOptions {
    pub fn new(depth: usize) -> ClassifyOptions {
        ClassifyOptions {
            depth,
            dedup: Dedup::ModNulls,
            rederive: RederiveBound::Shortest,
            limits: Limits::default(),
        }
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions::new(4)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Refuted { counterexample: Derivation },
    Unknown { reason: String },
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Refuted { .. } => "refuted",
            Outcome::Unknown { .. } => "unknown",
        }
    }
}

/// A derivable instance and how it was certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub instance: Instance,
    /// Length of the shortest enumerated derivation of the instance.
    pub shortest: usize,
    pub derivation: Derivation,
    pub trace: Option<ReductionTrace>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub derivations_checked: usize,
    pub instances: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationVerdict {
    pub class: Class,
    pub depth: usize,
    pub outcome: Outcome,
    /// Length bound used when the counterexample's instance was re-derived.
    pub rederive_len: Option<usize>,
    pub certificate: Certificate,
}

/// A canonical bucket key for instances: atoms with nulls blanked out.
fn shape(inst: &Instance) -> Vec<(String, Vec<Option<Term>>)> {
    let mut v: Vec<_> = inst
        .iter()
        .map(|a| {
            (
                a.pred.name.to_string(),
                a.args
                    .iter()
                    .map(|t| (!t.is_null()).then(|| t.clone()))
                    .collect(),
            )
        })
        .collect();
    v.sort();
    v
}

/// Derivable instances up to null renaming, each with a shortest derivation.
struct InstanceClasses {
    buckets: HashMap<Vec<(String, Vec<Option<Term>>)>, Vec<usize>>,
    reps: Vec<Derivation>,
}

impl InstanceClasses {
    fn new() -> Self {
        InstanceClasses {
            buckets: HashMap::new(),
            reps: Vec::new(),
        }
    }

    fn add(&mut self, d: Derivation) {
        let key = shape(d.final_instance());
        let bucket = self.buckets.entry(key).or_default();
        for &c in bucket.iter() {
            if isomorphic_mod_nulls(self.reps[c].final_instance(), d.final_instance()).is_some() {
                if d.len() < self.reps[c].len() {
                    self.reps[c] = d;
                }
                return;
            }
        }
        bucket.push(self.reps.len());
        self.reps.push(d);
    }
}

fn unknown(class: Class, depth: usize, e: Error, cert: Certificate) -> ClassificationVerdict {
    ClassificationVerdict {
        class,
        depth,
        outcome: Outcome::Unknown {
            reason: e.to_string(),
        },
        rederive_len: None,
        certificate: cert,
    }
}

fn reduces(d: &Derivation, kb: &KnowledgeBase, limits: &Limits) -> Result<Option<ReductionTrace>> {
    let g = build_derivation_graph(d, kb);
    match reduce(&g, Strategy::Full, limits) {
        ReductionOutcome::Reduced(t) => Ok(Some(t)),
        ReductionOutcome::Irreducible => Ok(None),
        ReductionOutcome::Unknown { states } => Err(Error::ResourceLimit(format!(
            "reduction search visited {states} graphs"
        ))),
    }
}

/// Bounded membership check on the knowledge base's database.
pub fn classify(kb: &KnowledgeBase, class: Class, opts: &ClassifyOptions) -> ClassificationVerdict {
    let depth = opts.depth;
    let mut cert = Certificate::default();
    let enum_opts = EnumOptions::new(depth)
        .dedup(opts.dedup)
        .limits(opts.limits);
    let mut classes = InstanceClasses::new();
    for d in enumerate_derivations(kb.database(), kb.rules(), enum_opts) {
        let d = match d {
            Ok(d) => d,
            Err(e) => return unknown(class, depth, e, cert),
        };
        cert.derivations_checked += 1;
        let refuted = match class {
            Class::Gbts => !is_greedy(&d, kb.rules()).greedy,
            Class::Cdgs => match reduces(&d, kb, &opts.limits) {
                Ok(t) => t.is_none(),
                Err(e) => return unknown(class, depth, e, cert),
            },
            Class::Wgbts | Class::Wcdgs => {
                classes.add(d);
                continue;
            }
        };
        if refuted {
            return ClassificationVerdict {
                class,
                depth,
                outcome: Outcome::Refuted { counterexample: d },
                rederive_len: None,
                certificate: cert,
            };
        }
    }
    if matches!(class, Class::Gbts | Class::Cdgs) {
        return ClassificationVerdict {
            class,
            depth,
            outcome: Outcome::Holds,
            rederive_len: None,
            certificate: cert,
        };
    }
    cert.instances = classes.reps.len();
    for rep in classes.reps {
        let bound = match opts.rederive {
            RederiveBound::Shortest => rep.len(),
            RederiveBound::Depth => depth,
        };
        let target = rep.final_instance();
        let found = match class {
            Class::Wgbts => find_greedy_rederivation(kb, target, bound, &opts.limits)
                .map(|d| d.map(|d| (d, None))),
            _ => {
                let mut trace = None;
                find_rederivation(kb, target, bound, &opts.limits, false, |d| {
                    trace = reduces(d, kb, &opts.limits)?;
                    Ok(trace.is_some())
                })
                .map(|d| d.map(|d| (d, trace)))
            }
        };
        match found {
            Ok(Some((derivation, trace))) => cert.witnesses.push(Witness {
                instance: target.clone(),
                shortest: rep.len(),
                derivation,
                trace,
            }),
            Ok(None) => {
                return ClassificationVerdict {
                    class,
                    depth,
                    outcome: Outcome::Refuted {
                        counterexample: rep,
                    },
                    rederive_len: Some(bound),
                    certificate: cert,
                }
            }
            Err(e) => return unknown(class, depth, e, cert),
        }
    }
    ClassificationVerdict {
        class,
        depth,
        outcome: Outcome::Holds,
        rederive_len: None,
        certificate: cert,
    }
}

impl ClassificationVerdict {
    /// Re-checks the verdict's evidence.
    pub fn verify(&self, kb: &KnowledgeBase, limits: &Limits) -> bool {
        let rules = kb.rules();
        let from_db = |d: &Derivation| {
            d.initial() == kb.database() && d.validate(rules).is_ok() && d.len() <= self.depth
        };
        match (&self.outcome, self.class) {
            (Outcome::Unknown { .. }, _) => true,
            (Outcome::Refuted { counterexample: d }, Class::Gbts) => {
                let report = is_greedy(d, rules);
                from_db(d) && !report.greedy && report.verify(d, rules)
            }
            (Outcome::Refuted { counterexample: d }, Class::Cdgs) => {
                from_db(d) && matches!(reduces(d, kb, limits), Ok(None))
            }
            (Outcome::Refuted { counterexample: d }, class) => {
                let Some(bound) = self.rederive_len else {
                    return false;
                };
                let target = d.final_instance();
                let found = if class == Class::Wgbts {
                    find_greedy_rederivation(kb, target, bound, limits)
                } else {
                    find_rederivation(kb, target, bound, limits, false, |x| {
                        Ok(reduces(x, kb, limits)?.is_some())
                    })
                };
                from_db(d) && matches!(found, Ok(None))
            }
            (Outcome::Holds, Class::Gbts | Class::Cdgs) => {
                let opts = EnumOptions::new(self.depth).dedup(Dedup::ModNulls).limits(*limits);
                enumerate_derivations(kb.database(), rules, opts).count()
                    == self.certificate.derivations_checked
            }
            (Outcome::Holds, class) => {
                self.certificate.witnesses.len() == self.certificate.instances
                    && self.certificate.witnesses.iter().all(|w| {
                        let d = &w.derivation;
                        let shaped = from_db(d)
                            && d.len() <= w.shortest.max(1).max(d.len().min(self.depth))
                            && isomorphic_mod_nulls(d.final_instance(), &w.instance).is_some();
                        shaped
                            && match class {
                                Class::Wgbts => is_greedy(d, rules).greedy,
                                _ => w.trace.as_ref().is_some_and(|t| {
                                    t.initial == build_derivation_graph(d, kb)
                                        && t.is_complete().unwrap_or(false)
                                }),
                            }
                    })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsumptionReport {
    pub verdicts: Vec<ClassificationVerdict>,
    pub violations: Vec<String>,
}

/// Runs all four checks and reports broken implications between them.
pub fn subsumption_check(kb: &KnowledgeBase, opts: &ClassifyOptions) -> SubsumptionReport {
    let verdicts: Vec<ClassificationVerdict> =
        Class::ALL.iter().map(|&c| classify(kb, c, opts)).collect();
    let get = |c: Class| &verdicts.iter().find(|v| v.class == c).unwrap().outcome;
    let mut violations = Vec::new();
    let known = |o: &Outcome| !matches!(o, Outcome::Unknown { .. });
    let holds = |o: &Outcome| matches!(o, Outcome::Holds);
    for (strong, weak) in [(Class::Gbts, Class::Wgbts), (Class::Cdgs, Class::Wcdgs)] {
        if holds(get(strong)) && known(get(weak)) && !holds(get(weak)) {
            violations.push(format!("{strong} holds but {weak} does not"));
        }
    }
    for (a, b) in [(Class::Gbts, Class::Cdgs), (Class::Wgbts, Class::Wcdgs)] {
        if known(get(a)) && known(get(b)) && get(a).name() != get(b).name() {
            violations.push(format!(
                "{a} is {} but {b} is {}",
                get(a).name(),
                get(b).name()
            ));
        }
    }
    SubsumptionReport {
        verdicts,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Entailment {
    /// The query maps into the k-th chase level, and into no earlier one.
    Entailed { k: usize },
    Unknown,
}

/// Sound, depth-bounded entailment of a Boolean query.
pub fn entails(
    kb: &KnowledgeBase,
    q: &BooleanQuery,
    depth: usize,
    limits: &Limits,
) -> Result<Entailment> {
    let levels = chase_levels(kb.database(), kb.rules(), depth, limits)?;
    Ok(levels
        .iter()
        .position(|i| maps_into(&q.atoms, i))
        .map_or(Entailment::Unknown, |k| Entailment::Entailed { k }))
}
