mod common;

use std::collections::BTreeMap;

use derivgraph::analysis::{is_greedy, permute_adjacent, rename_nulls};
use derivgraph::chase::{all_triggers, chase_levels, Derivation};
use derivgraph::gen::{GenConfig, KbGenerator};
use derivgraph::graph::{build_derivation_graph, check_decomposition_properties};
use derivgraph::hom::maps_into;
use derivgraph::reduce::{check_prefix_invariants, reduce, Strategy as Reduction};
use derivgraph::syntax::parse_document;
use derivgraph::treedecomp::{extract_tree_decomposition, validate_tree_decomposition, width_bound};
use derivgraph::{KnowledgeBase, Limits, Term};
use proptest::prelude::*;

fn random_kb(seed: u64) -> KnowledgeBase {
    KbGenerator::new(seed, GenConfig::default()).next_kb()
}

/// A derivation picking `choices[i] mod #triggers` at step i, stopping early
/// when nothing is triggered.
fn walk(kb: &KnowledgeBase, choices: &[usize]) -> Derivation {
    let mut d = Derivation::new(kb.database().clone());
    let mut nulls = d.null_gen();
    for &c in choices {
        let ts = all_triggers(d.final_instance(), kb.rules());
        if ts.is_empty() {
            break;
        }
        let (rule, hom) = &ts[c % ts.len()];
        d.apply(kb.rules(), *rule, hom, &mut nulls).unwrap();
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn permutation_keeps_derivations_valid(seed in any::<u64>(), choices in proptest::collection::vec(0..64usize, 2..=5)) {
        let kb = random_kb(seed);
        let rules = kb.rules();
        let d = walk(&kb, &choices);
        let greedy = is_greedy(&d, rules).greedy;
        for i in 1..d.len() {
            if let Ok(p) = permute_adjacent(&d, i, rules) {
                prop_assert!(p.validate(rules).is_ok());
                prop_assert_eq!(p.final_instance(), d.final_instance());
                if greedy {
                    prop_assert!(is_greedy(&p, rules).greedy);
                }
            }
        }
    }

    #[test]
    fn greediness_ignores_null_names(seed in any::<u64>(), choices in proptest::collection::vec(0..64usize, 0..=5), shift in 1..50u64) {
        let kb = random_kb(seed);
        let d = walk(&kb, &choices);
        let nulls = d.final_instance().nulls();
        let count = nulls.len() as u64;
        // a rotation of the null ordinals, moved up by `shift`
        let map: BTreeMap<Term, Term> = nulls
            .iter()
            .enumerate()
            .map(|(k, t)| (t.clone(), Term::null(shift + (k as u64 + shift) % count.max(1))))
            .collect();
        let renamed = rename_nulls(&d, &map);
        prop_assert!(renamed.validate(kb.rules()).is_ok());
        let a = is_greedy(&d, kb.rules());
        let b = is_greedy(&renamed, kb.rules());
        prop_assert_eq!(a.greedy, b.greedy);
        prop_assert_eq!(a.first_violation, b.first_violation);
    }

    #[test]
    fn chase_is_monotone_and_covers_derivations(seed in any::<u64>(), choices in proptest::collection::vec(0..64usize, 0..=3)) {
        let kb = random_kb(seed);
        let levels = chase_levels(kb.database(), kb.rules(), 3, &Limits::default()).unwrap();
        for w in levels.windows(2) {
            prop_assert!(w[0].is_subset(&w[1]));
        }
        let d = walk(&kb, &choices);
        let atoms: Vec<_> = d.final_instance().iter().cloned().collect();
        prop_assert!(maps_into(&atoms, &levels[d.len()]));
    }

    #[test]
    fn greedy_iff_reducible(seed in any::<u64>(), choices in proptest::collection::vec(0..64usize, 0..=4)) {
        let kb = random_kb(seed);
        let d = walk(&kb, &choices);
        let g = build_derivation_graph(&d, &kb);
        let greedy = is_greedy(&d, kb.rules()).greedy;
        let full = reduce(&g, Reduction::Full, &Limits::default());
        let cr = reduce(&g, Reduction::CrOnly, &Limits::default());
        prop_assert_eq!(greedy, full.is_reduced());
        prop_assert_eq!(greedy, cr.is_reduced());
        for trace in [full.trace(), cr.trace()].into_iter().flatten() {
            prop_assert!(check_prefix_invariants(trace).holds());
            let graphs = trace.graphs().unwrap();
            for h in &graphs {
                let rep = check_decomposition_properties(h, d.final_instance(), &kb);
                prop_assert!(rep.holds(), "{:?}", rep.violations);
                prop_assert!(h.generative_path_violations().is_empty());
            }
            let td = extract_tree_decomposition(graphs.last().unwrap()).unwrap();
            prop_assert!(validate_tree_decomposition(&td, d.final_instance()));
            prop_assert!(td.max_bag() <= width_bound(&kb));
        }
    }

    #[test]
    fn printed_documents_parse_back(seed in any::<u64>()) {
        let kb = random_kb(seed);
        let mut text = String::new();
        for a in kb.database().iter() {
            text.push_str(&format!("{a}.\n"));
        }
        for r in kb.rules() {
            text.push_str(&format!("{r}\n"));
        }
        let doc = parse_document(&text).unwrap();
        prop_assert_eq!(&doc.database(), kb.database());
        prop_assert_eq!(doc.rules.as_slice(), kb.rules());
        let again = parse_document(&doc.to_string()).unwrap();
        prop_assert_eq!(again, doc);
    }
}
