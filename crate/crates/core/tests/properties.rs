use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use late_core::fixtures::{random_grammar, random_sentence, RandomGrammarParams};
use late_core::grammar::replicated_rule_count;
use late_core::verify::brute_force_recognize;
use late_core::{
    canonicalize_earley, canonicalize_late, earley_recognize, late_recognize, parse_grammar,
    replicate_nonterminals, tokenize, wrap_wildcard, EarleyParser, Grammar, LateParser, ParallelConfig,
    ParallelLateParser, QueuePolicy, Sentence,
};

fn instance(seed: u64, params: RandomGrammarParams, max_len: usize) -> (Grammar, Sentence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_grammar(&mut rng, &params);
    let w = random_sentence(&mut rng, &g, max_len);
    (g, w)
}

/// Re-tokenizes `w` against a grammar with the same terminal names.
fn carry(w: &Sentence, from: &Grammar, to: &Grammar) -> Sentence {
    tokenize(&w.display(from), to).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn earley_and_late_charts_match(seed in any::<u64>()) {
        let (g, w) = instance(seed, RandomGrammarParams::epsilon_free(), 8);
        let earley = canonicalize_earley(&EarleyParser::new(&g, &w).unwrap().run());
        let late = canonicalize_late(&LateParser::new(&g, &w).run().chart);
        prop_assert_eq!(earley, late);
    }

    #[test]
    fn parallel_matches_serial_with_nullable_rules(seed in any::<u64>(), workers in 1usize..5, order in any::<u64>()) {
        let (g, w) = instance(seed, RandomGrammarParams::nullable(), 6);
        let serial = canonicalize_late(&LateParser::new(&g, &w).run().chart);
        let cfg = ParallelConfig::new(workers, QueuePolicy::Random(order)).unwrap();
        let par = ParallelLateParser::new(&g, &w, cfg).unwrap().run().unwrap();
        prop_assert_eq!(serial, canonicalize_late(&par.chart));
    }

    #[test]
    fn late_items_are_sound(seed in any::<u64>()) {
        // Every item spans a substring its consumed prefix derives, so the
        // tokens between origin and current match the rhs terminals read so far.
        let (g, w) = instance(seed, RandomGrammarParams::nullable(), 6);
        let chart = LateParser::new(&g, &w).run().chart;
        for item in chart.items() {
            prop_assert!(item.origin <= item.current);
            prop_assert!(item.current as usize <= w.len());
            let rhs = &g.rule(item.rule).rhs;
            prop_assert!(item.dot as usize <= rhs.len());
            let read_terminals = rhs[..item.dot as usize].iter().filter(|&&s| g.kind(s) == late_core::SymbolKind::Terminal).count();
            prop_assert!(read_terminals <= (item.current - item.origin) as usize);
        }
    }

    #[test]
    fn recognition_is_invariant_under_replication(seed in any::<u64>(), m in 1usize..4) {
        let (g, w) = instance(seed, RandomGrammarParams::epsilon_free(), 6);
        let r = replicate_nonterminals(&g, m).unwrap();
        prop_assert_eq!(r.rules().len() as u128, replicated_rule_count(&g, m));
        let rw = carry(&w, &g, &r);
        let expected = brute_force_recognize(&g, &w).unwrap();
        prop_assert_eq!(earley_recognize(&EarleyParser::new(&r, &rw).unwrap().run(), &r, &rw), expected);
        prop_assert_eq!(late_recognize(&LateParser::new(&r, &rw).run().chart, &r, &rw), expected);
    }

    #[test]
    fn wrapping_adds_five_rules_per_grammar_plus_one_per_terminal(seed in any::<u64>()) {
        let (g, _) = instance(seed, RandomGrammarParams::nullable(), 0);
        let wrapped = wrap_wildcard(&g);
        prop_assert_eq!(wrapped.rules().len(), g.rules().len() + 5 + g.terminals().count().max(1));
        let names = |g: &Grammar| { let mut v: Vec<String> = g.terminals().map(|t| g.name(t).to_string()).collect(); v.sort(); v };
        prop_assert_eq!(names(&wrapped), names(&g));
    }

    #[test]
    fn grammar_text_round_trips(seed in any::<u64>()) {
        let (g, _) = instance(seed, RandomGrammarParams::nullable(), 0);
        let again = parse_grammar(&g.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), g.to_string());
        prop_assert_eq!(again.rules().len(), g.rules().len());
    }
}
