//! Seeded generator of small random knowledge bases.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Atom, Instance, KnowledgeBase, Rule, Term};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_rules: usize,
    pub max_arity: usize,
    pub max_body: usize,
    pub max_head: usize,
    pub max_db: usize,
    pub predicates: usize,
    pub constants: usize,
    /// Chance that a rule argument is a constant rather than a variable.
    pub rule_constant_rate: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_rules: 3,
            max_arity: 3,
            max_body: 2,
            max_head: 2,
            max_db: 3,
            predicates: 2,
            constants: 2,
            rule_constant_rate: 0.05,
        }
    }
}

const CONSTANTS: [&str; 4] = ["a", "b", "c", "d"];

/// A deterministic stream of knowledge bases.
pub struct KbGenerator {
    rng: ChaCha8Rng,
    cfg: GenConfig,
}

impl KbGenerator {
    pub fn new(seed: u64, cfg: GenConfig) -> KbGenerator {
        KbGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
        }
    }

    pub fn next_kb(&mut self) -> KnowledgeBase {
        random_kb(&mut self.rng, &self.cfg)
    }
}

impl Iterator for KbGenerator {
    type Item = KnowledgeBase;
    fn next(&mut self) -> Option<KnowledgeBase> {
        Some(self.next_kb())
    }
}

pub fn random_kb<R: Rng>(rng: &mut R, cfg: &GenConfig) -> KnowledgeBase {
    let arities: Vec<usize> = (0..cfg.predicates.max(1))
        .map(|_| rng.gen_range(1..=cfg.max_arity.max(1)))
        .collect();
    let consts: Vec<Term> = CONSTANTS[..cfg.constants.clamp(1, CONSTANTS.len())]
        .iter()
        .map(|c| Term::constant(c))
        .collect();
    let atom = |rng: &mut R, pick: &mut dyn FnMut(&mut R) -> Term| {
        let p = rng.gen_range(0..arities.len());
        let args = (0..arities[p]).map(|_| pick(rng)).collect();
        Atom::new(&format!("p{p}"), args)
    };

    let db_size = rng.gen_range(1..=cfg.max_db.max(1));
    let db = Instance::from_atoms(
        (0..db_size).map(|_| atom(rng, &mut |r: &mut R| consts.choose(r).unwrap().clone())),
    )
    .expect("ground atoms");

    let n_rules = rng.gen_range(1..=cfg.max_rules.max(1));
    let mut rules = Vec::new();
    for id in 1..=n_rules {
        let body_vars: Vec<Term> = (0..5).map(|i| Term::var(&format!("X{i}"))).collect();
        let n_body = rng.gen_range(1..=cfg.max_body.max(1));
        let mut used = Vec::new();
        let body: Vec<Atom> = (0..n_body)
            .map(|_| {
                atom(rng, &mut |r: &mut R| {
                    if r.gen_bool(cfg.rule_constant_rate) {
                        return consts.choose(r).unwrap().clone();
                    }
                    let v = body_vars.choose(r).unwrap().clone();
                    used.push(v.clone());
                    v
                })
            })
            .collect();
        let n_head = rng.gen_range(1..=cfg.max_head.max(1));
        let exist: Vec<Term> = (0..2).map(|i| Term::var(&format!("Y{i}"))).collect();
        let head: Vec<Atom> = (0..n_head)
            .map(|_| {
                atom(rng, &mut |r: &mut R| {
                    if !used.is_empty() && r.gen_bool(0.5) {
                        used.choose(r).unwrap().clone()
                    } else if r.gen_bool(cfg.rule_constant_rate) {
                        consts.choose(r).unwrap().clone()
                    } else {
                        exist.choose(r).unwrap().clone()
                    }
                })
            })
            .collect();
        rules.push(Rule::new(&format!("r{id}"), body, head).expect("non-empty body and head"));
    }
    KnowledgeBase::new(db, rules).expect("arities are fixed per predicate")
}
