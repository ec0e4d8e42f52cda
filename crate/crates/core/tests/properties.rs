use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::Rng;

use rr_core::counter::AcceptMode;
use rr_core::engine::{self, MethodChoice};
use rr_core::filters::{self, FilterSpec};
use rr_core::gen::{random_cnf, random_counter, random_nfa, rng};
use rr_core::oracle::{grammar_words, nfa_words, sigma_member, words_named};
use rr_core::reductions::{self, CsTransducer};
use rr_core::transducer::Transducer;
use rr_core::{Cfg, Nfa, Word};

const NAMES: [&str; 3] = ["S", "A", "B"];

/// Arbitrary grammar over `{a, b}` with up to three nonterminals, ε-rules
/// and unit rules allowed.
fn grammar() -> impl Strategy<Value = Cfg> {
    let sym = prop_oneof![
        (0..3usize).prop_map(|i| NAMES[i].to_string()),
        prop_oneof![Just("a".to_string()), Just("b".to_string())],
    ];
    let rule = (0..3usize, prop::collection::vec(sym, 0..=3));
    prop::collection::vec(rule, 1..=6).prop_map(|rules| {
        let mut text = String::new();
        for (lhs, rhs) in rules {
            text.push_str(&format!("{} -> {}\n", NAMES[lhs], rhs.join(" ")));
        }
        if !text.starts_with("S ") {
            text = format!("S -> a\n{text}");
        }
        Cfg::parse(&text).expect("generated grammar parses")
    })
}

fn ab() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

fn nfa_ab(seed: u64, epsilon: bool) -> Nfa {
    let mut r = rng(seed);
    let n = r.gen_range(1..=4);
    random_nfa(&mut r, n, &ab(), 0.3, epsilon)
}

fn nfa_d2(seed: u64) -> Nfa {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3);
    let epsilon = r.gen_bool(0.3);
    random_nfa(&mut r, n, &filters::dyck_alphabet(2), 0.25, epsilon)
}

fn shortest(words: &BTreeSet<Word>) -> Option<usize> {
    words.iter().map(Vec::len).min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cnf_preserves_language(g in grammar()) {
        let cnf = g.to_cnf();
        prop_assert!(cnf.is_cnf());
        let lang = grammar_words(&g, 6);
        prop_assert_eq!(&grammar_words(&cnf, 6), &lang);
        for w in words_named(cnf.terminals(), 5) {
            prop_assert_eq!(cnf.cyk(&w).unwrap(), lang.contains(&w));
        }
    }

    #[test]
    fn grammar_text_round_trip(g in grammar()) {
        prop_assert_eq!(Cfg::parse(&g.to_text()).unwrap(), g.clone());
        let cnf = g.to_cnf();
        prop_assert_eq!(Cfg::parse(&cnf.to_text()).unwrap(), cnf);
    }

    #[test]
    fn shortest_word_is_shortest(g in grammar()) {
        let lang = grammar_words(&g, 6);
        match g.shortest_word() {
            Some(w) => {
                prop_assert!(g.to_cnf().cyk(&w).unwrap());
                if let Some(l) = shortest(&lang) {
                    prop_assert_eq!(w.len(), l);
                }
            }
            None => prop_assert!(lang.is_empty()),
        }
    }

    #[test]
    fn nfa_json_round_trip(seed in any::<u64>(), eps in any::<bool>()) {
        let a = nfa_ab(seed, eps);
        prop_assert_eq!(Nfa::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn epsilon_removal_and_trim_keep_language(seed in any::<u64>()) {
        let a = nfa_ab(seed, true);
        let lang = nfa_words(&a, 6);
        let free = a.remove_epsilon();
        prop_assert!(!free.has_epsilon());
        prop_assert_eq!(&nfa_words(&free, 6), &lang);
        prop_assert_eq!(&nfa_words(&a.trim(), 6), &lang);
        match a.shortest_witness() {
            Some(w) => {
                prop_assert!(a.accepts(&w).unwrap());
                if w.len() <= 6 {
                    prop_assert_eq!(Some(w.len()), shortest(&lang));
                }
            }
            None => prop_assert!(lang.is_empty()),
        }
    }

    #[test]
    fn bar_hillel_variants_agree(seed in any::<u64>(), eps in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_cnf(&mut r, 4, &ab());
        let a = nfa_ab(r.gen(), eps);
        let want: BTreeSet<Word> = grammar_words(&g, 6)
            .into_iter()
            .filter(|w| a.accepts(w).unwrap())
            .collect();
        let exact = reductions::bar_hillel(&g, &a);
        let lazy = reductions::bar_hillel_productive(&g, &a).unwrap();
        prop_assert_eq!(Cfg::parse(&exact.to_text()).unwrap(), exact.clone());
        prop_assert_eq!(Cfg::parse(&lazy.to_text()).unwrap(), lazy.clone());
        prop_assert_eq!(&grammar_words(&exact, 6), &want);
        prop_assert_eq!(&grammar_words(&lazy, 6), &want);
        let min = reductions::intersection_min_length(&g, &a).unwrap();
        prop_assert_eq!(min.is_some(), exact.is_nonempty());
        if let Some(l) = shortest(&want) {
            prop_assert_eq!(min, Some(l));
        }
        prop_assert_eq!(lazy.shortest_word().map(|w| w.len()), min);
    }

    #[test]
    fn cs_images_are_grammar_words(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cnf(&mut r, 3, &ab());
        let cs = CsTransducer::new(&g);
        for w in grammar_words(&g, 3) {
            let d = cs.preimage(&w).unwrap();
            prop_assert!(d.is_some(), "no preimage for {:?}", w);
            let d = d.unwrap();
            prop_assert!(filters::dyck_member(2, &d).unwrap());
            for img in cs.full.transduce_bounded(&d, 6).unwrap() {
                prop_assert!(g.cyk(&img).unwrap(), "{:?} maps to {:?}", d, img);
            }
        }
    }

    #[test]
    fn marking_keeps_dyck_intersection(seed in any::<u64>()) {
        let a = nfa_d2(seed);
        let m = reductions::mark_automaton(&a).unwrap();
        prop_assert_eq!(m.nfa.num_states(), a.num_states() * (reductions::height_bound(&a) + 1) + 1);
        let before: BTreeSet<Word> = nfa_words(&a, 6)
            .into_iter()
            .filter(|w| filters::dyck_member(2, w).unwrap())
            .collect();
        let after = nfa_words(&m.nfa, 6);
        for w in &after {
            prop_assert!(a.accepts(w).unwrap());
            let mut h = 0i64;
            for s in w {
                h += if s.starts_with("abar") { -1 } else { 1 };
                prop_assert!(h >= 0);
            }
            prop_assert_eq!(h, 0);
        }
        prop_assert!(before.is_subset(&after));
        prop_assert!(m.height[m.reject_state].is_none());
    }

    #[test]
    fn ssharpup_reduction_preserves_emptiness(seed in any::<u64>()) {
        let a = nfa_d2(seed);
        let b = reductions::reduce_d2_to_ssharpup(&a).unwrap();
        let report = engine::nrr_decide(&a, &FilterSpec::Dyck(2)).unwrap();
        if let Some(u) = report.witness {
            let w = reductions::phi_witness(&u).unwrap();
            prop_assert!(b.accepts(&w).unwrap());
            prop_assert!(filters::s_sharp_up_member(&w).unwrap());
        } else {
            for w in nfa_words(&b, 14) {
                prop_assert!(!filters::s_sharp_up_member(&w).unwrap(), "{:?}", w);
            }
        }
    }

    #[test]
    fn counter_product_is_intersection(seed in any::<u64>(), zero in any::<bool>()) {
        let mut r = rng(seed);
        let mode = if zero { AcceptMode::FinalStateAndZero } else { AcceptMode::FinalState };
        let n = r.gen_range(1..=3);
        let m = random_counter(&mut r, n, &ab(), 6, true, mode);
        let a = nfa_ab(r.gen(), false);
        let p = m.product(&a).unwrap();
        for w in words_named(&ab(), 5) {
            prop_assert_eq!(p.accepts(&w).unwrap(), m.accepts(&w).unwrap() && a.accepts(&w).unwrap());
        }
        let brute = words_named(&ab(), 5).into_iter().filter(|w| m.accepts(w).unwrap()).map(|w| w.len()).min();
        let found = m.shortest_accepted(64);
        if let Some(w) = &found {
            prop_assert!(m.accepts(w).unwrap());
        }
        if let Some(l) = brute {
            prop_assert_eq!(found.map(|w| w.len()), Some(l));
        }
        let expanded = m.to_nfa(m.default_cap());
        for w in nfa_words(&expanded, 5) {
            prop_assert!(m.accepts(&w).unwrap());
        }
        prop_assert_eq!(rr_core::CounterAutomaton::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn engine_methods_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let a = random_nfa(&mut r, n, &filters::dyck_alphabet(1), 0.35, false);
        let f = FilterSpec::Dyck(1);
        let answers: Vec<_> = [MethodChoice::BarHillel, MethodChoice::Counter, MethodChoice::Log2]
            .into_iter()
            .map(|m| engine::nrr_decide_with(&a, &f, m).unwrap())
            .collect();
        for rep in &answers {
            prop_assert_eq!(rep.nonempty, answers[0].nonempty);
            if let Some(w) = &rep.witness {
                prop_assert!(a.accepts(w).unwrap());
                prop_assert!(filters::dyck_member(1, w).unwrap());
            }
        }
        let brute = nfa_words(&a, 8).into_iter().any(|w| filters::dyck_member(1, &w).unwrap());
        if brute {
            prop_assert!(answers[0].nonempty);
        }
    }

    #[test]
    fn log2_matches_pipeline(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_cnf(&mut r, 4, &ab());
        let a = nfa_ab(r.gen(), false);
        let stats = engine::log2_check(&g, &a).unwrap();
        let min = reductions::intersection_min_length(&g, &a).unwrap();
        prop_assert_eq!(stats.result, min.is_some());
        prop_assert_eq!(stats.witness_length, min);
    }

    #[test]
    fn substitution_matches_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut inner = filters::dyck_alphabet(1);
        inner.extend(filters::symmetric_alphabet());
        let outer = FilterSpec::Dyck(1);
        let sub: BTreeMap<String, FilterSpec> = outer
            .alphabet()
            .into_iter()
            .map(|x| (x, if r.gen_bool(0.5) { FilterSpec::Dyck(1) } else { FilterSpec::Symmetric }))
            .collect();
        let n = r.gen_range(1..=2);
        let a = random_nfa(&mut r, n, &inner, 0.15, false);
        let report = engine::substitution_decide(&a, &outer, &sub).unwrap();
        let g = outer.grammar().unwrap();
        let brute = nfa_words(&a, 8).into_iter().find(|w| sigma_member(&g, &sub, w).unwrap());
        if brute.is_some() {
            prop_assert!(report.nonempty);
        }
        if let Some(w) = &report.witness {
            prop_assert!(a.accepts(w).unwrap());
            prop_assert!(sigma_member(&g, &sub, w).unwrap());
        }
    }

    #[test]
    fn morphism_composition(xs in prop::collection::vec(0..2usize, 0..6)) {
        let double = Transducer::morphism(&["a", "b"], &["a", "b"], &[("a", vec!["a", "a"]), ("b", vec!["b"])]).unwrap();
        let swap = Transducer::morphism(&["a", "b"], &["a", "b"], &[("a", vec!["b"]), ("b", vec!["a"])]).unwrap();
        let both = double.compose(&swap).unwrap();
        let w: Word = xs.iter().map(|&x| ab()[x].clone()).collect();
        let mut expected = Vec::new();
        for s in &w {
            if s == "a" { expected.extend(["b".to_string(), "b".to_string()]); } else { expected.push("a".to_string()); }
        }
        prop_assert_eq!(both.transduce_bounded(&w, 16).unwrap(), BTreeSet::from([expected]));
        prop_assert_eq!(Transducer::from_json(&both.to_json()).unwrap(), both);
    }
}
