//! The classic serial Earley recognizer: one item set per input position,
//! each processed to a fixpoint with a FIFO work list before moving on.

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::grammar::{validate_for_earley, EarleyCompat, Grammar, RuleId, Sentence, SymbolId, SymbolKind};

/// A dotted rule with its origin; the current position is the index of the
/// set that holds it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub rule: RuleId,
    pub dot: u32,
    pub origin: u32,
}

impl Item {
    pub fn new(rule: RuleId, dot: u32, origin: u32) -> Self {
        Item { rule, dot, origin }
    }

    /// The symbol after the dot, or `None` if the item is finished.
    #[inline]
    pub fn next_symbol(&self, g: &Grammar) -> Option<SymbolId> {
        g.rule(self.rule).rhs.get(self.dot as usize).copied()
    }

    #[inline]
    pub fn advance(self) -> Item {
        Item {
            dot: self.dot + 1,
            ..self
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EarleyError {
    #[error("classic Earley cannot handle ε-rules: {}", .rules.join(", "))]
    EpsilonRules { rules: Vec<String> },
}

/// One Earley set. Insertion order is kept so the set doubles as its own
/// work list.
#[derive(Clone, Debug, Default)]
pub struct EarleySet {
    items: Vec<Item>,
    seen: FxHashSet<Item>,
    /// Items of this set indexed by the nonterminal after their dot.
    waiting: FxHashMap<SymbolId, Vec<Item>>,
}

impl EarleySet {
    /// Inserts `item`, returning `false` if it was already present.
    pub fn insert(&mut self, item: Item, g: &Grammar) -> bool {
        if !self.seen.insert(item) {
            return false;
        }
        self.items.push(item);
        if let Some(next) = item.next_symbol(g) {
            if g.kind(next) == SymbolKind::Nonterminal {
                self.waiting.entry(next).or_default().push(item);
            }
        }
        true
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.seen.contains(item)
    }

    /// Items in insertion order.
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn waiting_on(&self, n: SymbolId) -> &[Item] {
        self.waiting.get(&n).map_or(&[], Vec::as_slice)
    }
}

/// `|W| + 1` item sets, one per input position.
#[derive(Clone, Debug)]
pub struct EarleyChart {
    sets: Vec<EarleySet>,
    dispatches: usize,
}

impl EarleyChart {
    pub fn new(sentence_len: usize) -> Self {
        EarleyChart {
            sets: vec![EarleySet::default(); sentence_len + 1],
            dispatches: 0,
        }
    }

    pub fn sets(&self) -> &[EarleySet] {
        &self.sets
    }

    pub fn set(&self, k: usize) -> &EarleySet {
        &self.sets[k]
    }

    pub fn insert(&mut self, k: usize, item: Item, g: &Grammar) -> bool {
        self.sets[k].insert(item, g)
    }

    /// Total number of items across all sets.
    pub fn len(&self) -> usize {
        self.sets.iter().map(EarleySet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of items handed to scan, predict or complete.
    pub fn dispatches(&self) -> usize {
        self.dispatches
    }
}

/// Advances `item` over the token at `k` into set `k + 1`.
///
/// An ε after the dot is stepped over in place (same set), the way the
/// classic algorithm treats an empty production when it is given one.
pub fn earley_scan(item: Item, k: usize, w: &Sentence, g: &Grammar, chart: &mut EarleyChart) {
    let Some(next) = item.next_symbol(g) else { return };
    match g.kind(next) {
        SymbolKind::Epsilon => {
            chart.insert(k, item.advance(), g);
        }
        SymbolKind::Terminal => {
            if w.get(k) == Some(next) {
                chart.insert(k + 1, item.advance(), g);
            }
        }
        SymbolKind::Nonterminal => {}
    }
}

pub fn earley_predict(item: Item, k: usize, g: &Grammar, chart: &mut EarleyChart) {
    let Some(n) = item.next_symbol(g) else { return };
    for &rule in g.rules_for(n) {
        chart.insert(k, Item::new(rule, 0, k as u32), g);
    }
}

/// Advances every item of the origin set that was waiting on the finished
/// item's left-hand side.
pub fn earley_complete(item: Item, k: usize, g: &Grammar, chart: &mut EarleyChart) {
    let lhs = g.rule(item.rule).lhs;
    let origin = item.origin as usize;
    if origin == k {
        // Only reachable with ε-rules: the origin set is the one being extended.
        let waiters = chart.sets[origin].waiting_on(lhs).to_vec();
        for w in waiters {
            chart.insert(k, w.advance(), g);
        }
        return;
    }
    let (before, after) = chart.sets.split_at_mut(k);
    let target = &mut after[0];
    for &w in before[origin].waiting_on(lhs) {
        target.insert(w.advance(), g);
    }
}

/// A prepared Earley run. Construction allocates the chart and seeds set 0;
/// [`run`](Self::run) does the chart construction proper.
pub struct EarleyParser<'a> {
    grammar: &'a Grammar,
    sentence: &'a Sentence,
    chart: EarleyChart,
}

impl<'a> EarleyParser<'a> {
    pub fn new(grammar: &'a Grammar, sentence: &'a Sentence) -> Result<Self, EarleyError> {
        if let EarleyCompat::Rejected(rules) = validate_for_earley(grammar) {
            return Err(EarleyError::EpsilonRules {
                rules: rules.into_iter().map(|r| grammar.display_rule(r)).collect(),
            });
        }
        Ok(Self::new_unchecked(grammar, sentence))
    }

    /// Skips the ε-rule check. On grammars with ε-rules the result may miss
    /// items; this exists to exhibit that failure.
    pub fn new_unchecked(grammar: &'a Grammar, sentence: &'a Sentence) -> Self {
        let mut chart = EarleyChart::new(sentence.len());
        for &rule in grammar.rules_for(grammar.start()) {
            chart.insert(0, Item::new(rule, 0, 0), grammar);
        }
        EarleyParser {
            grammar,
            sentence,
            chart,
        }
    }

    pub fn run(mut self) -> EarleyChart {
        let g = self.grammar;
        let w = self.sentence;
        for k in 0..=w.len() {
            let mut cursor = 0;
            while cursor < self.chart.sets[k].items.len() {
                let item = self.chart.sets[k].items[cursor];
                cursor += 1;
                self.chart.dispatches += 1;
                match item.next_symbol(g) {
                    None => earley_complete(item, k, g, &mut self.chart),
                    Some(s) if g.kind(s) == SymbolKind::Nonterminal => {
                        earley_predict(item, k, g, &mut self.chart)
                    }
                    Some(_) => earley_scan(item, k, w, g, &mut self.chart),
                }
            }
        }
        self.chart
    }
}

pub fn earley_parse(g: &Grammar, w: &Sentence) -> Result<EarleyChart, EarleyError> {
    Ok(EarleyParser::new(g, w)?.run())
}

/// True iff a finished START item with origin 0 is in the last set.
pub fn earley_recognize(chart: &EarleyChart, g: &Grammar, w: &Sentence) -> bool {
    let Some(last) = chart.sets.get(w.len()) else {
        return false;
    };
    g.rules_for(g.start()).iter().any(|&rule| {
        let len = g.rule(rule).rhs.len() as u32;
        last.contains(&Item::new(rule, len, 0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_grammar, tokenize};

    fn setup(grammar: &str, input: &str) -> (Grammar, Sentence) {
        let g = parse_grammar(grammar).unwrap();
        let w = tokenize(input, &g).unwrap();
        (g, w)
    }

    fn rule(g: &Grammar, text: &str) -> RuleId {
        (0..g.rules().len() as u32)
            .map(RuleId)
            .find(|&r| g.display_rule(r) == text)
            .unwrap_or_else(|| panic!("no rule `{text}`"))
    }

    #[test]
    fn scan_match_mismatch_and_end() {
        let g = parse_grammar("START -> a\nX -> b").unwrap();
        let r = rule(&g, "START -> a");
        let item = Item::new(r, 0, 0);

        let w = tokenize("a", &g).unwrap();
        let mut chart = EarleyChart::new(1);
        chart.insert(0, item, &g);
        earley_scan(item, 0, &w, &g, &mut chart);
        assert!(chart.set(1).contains(&Item::new(r, 1, 0)));

        let w = tokenize("b", &g).unwrap();
        let mut chart = EarleyChart::new(1);
        chart.insert(0, item, &g);
        earley_scan(item, 0, &w, &g, &mut chart);
        assert!(chart.set(1).is_empty());

        let w = Sentence::default();
        let mut chart = EarleyChart::new(0);
        chart.insert(0, item, &g);
        earley_scan(item, 0, &w, &g, &mut chart);
        assert_eq!(chart.len(), 1);
    }

    #[test]
    fn predict_inserts_all_alternatives_once() {
        let g = parse_grammar("START -> N\nN -> a | b").unwrap();
        let item = Item::new(rule(&g, "START -> N"), 0, 0);
        let mut chart = EarleyChart::new(0);
        chart.insert(0, item, &g);
        earley_predict(item, 0, &g, &mut chart);
        assert!(chart.set(0).contains(&Item::new(rule(&g, "N -> a"), 0, 0)));
        assert!(chart.set(0).contains(&Item::new(rule(&g, "N -> b"), 0, 0)));
        assert_eq!(chart.len(), 3);
        earley_predict(item, 0, &g, &mut chart);
        assert_eq!(chart.len(), 3);
    }

    #[test]
    fn predict_epsilon_rule() {
        let g = parse_grammar("START -> N N\nN -> EPSILON").unwrap();
        let item = Item::new(rule(&g, "START -> N N"), 0, 0);
        let mut chart = EarleyChart::new(0);
        earley_predict(item, 0, &g, &mut chart);
        assert!(chart.set(0).contains(&Item::new(rule(&g, "N -> EPSILON"), 0, 0)));
    }

    #[test]
    fn complete_advances_waiters() {
        let g = parse_grammar("START -> N\nN -> a").unwrap();
        let waiter = Item::new(rule(&g, "START -> N"), 0, 0);
        let mut chart = EarleyChart::new(1);
        chart.insert(0, waiter, &g);
        earley_complete(Item::new(rule(&g, "N -> a"), 1, 0), 1, &g, &mut chart);
        assert!(chart.set(1).contains(&waiter.advance()));

        let mut empty = EarleyChart::new(1);
        earley_complete(Item::new(rule(&g, "N -> a"), 1, 0), 1, &g, &mut empty);
        assert!(empty.is_empty());
    }

    #[test]
    fn epsilon_completion_stalls() {
        let (g, w) = setup("START -> N N\nN -> EPSILON", "");
        let start = Item::new(rule(&g, "START -> N N"), 0, 0);
        let eps = rule(&g, "N -> EPSILON");
        let mut chart = EarleyChart::new(0);
        chart.insert(0, start, &g);
        earley_predict(start, 0, &g, &mut chart);
        earley_scan(Item::new(eps, 0, 0), 0, &w, &g, &mut chart);
        earley_complete(Item::new(eps, 1, 0), 0, &g, &mut chart);
        let middle = start.advance();
        assert!(chart.set(0).contains(&middle));
        // Re-predicting adds nothing, so the middle item never advances again.
        let before = chart.len();
        earley_predict(middle, 0, &g, &mut chart);
        assert_eq!(chart.len(), before);
        assert!(!chart.set(0).contains(&middle.advance()));

        let full = EarleyParser::new_unchecked(&g, &w).run();
        assert!(!earley_recognize(&full, &g, &w));
    }

    #[test]
    fn rejects_epsilon_grammars() {
        let (g, w) = setup("START -> N N\nN -> EPSILON", "");
        let err = earley_parse(&g, &w).unwrap_err();
        assert_eq!(
            err,
            EarleyError::EpsilonRules {
                rules: vec!["N -> EPSILON".into()]
            }
        );
    }

    #[test]
    fn tiny_chart() {
        let (g, w) = setup("START -> a", "a");
        let chart = earley_parse(&g, &w).unwrap();
        assert_eq!(chart.len(), 2);
        assert!(chart.set(0).contains(&Item::new(RuleId(0), 0, 0)));
        assert!(chart.set(1).contains(&Item::new(RuleId(0), 1, 0)));
        assert!(earley_recognize(&chart, &g, &w));
        assert_eq!(chart.dispatches(), chart.len());
    }

    #[test]
    fn recognize_cases() {
        for (input, expected) in [("a", true), ("b", false), ("a a", false), ("", false)] {
            let (g, w) = setup("START -> a\nX -> b", input);
            let chart = earley_parse(&g, &w).unwrap();
            assert_eq!(earley_recognize(&chart, &g, &w), expected, "{input:?}");
        }
    }

    #[test]
    fn ambiguous_self_recursion() {
        let (g, w) = setup("START -> START START\nSTART -> a", "a a a");
        let chart = earley_parse(&g, &w).unwrap();
        assert!(earley_recognize(&chart, &g, &w));
        assert_eq!(chart.dispatches(), chart.len());
    }

    #[test]
    fn origin_is_pinned_to_zero() {
        // START finishes at 2 from origin 1, but only origin 0 counts.
        let (g, w) = setup("START -> c START d | b", "c b");
        let chart = earley_parse(&g, &w).unwrap();
        let inner = Item::new(rule(&g, "START -> b"), 1, 1);
        assert!(chart.set(2).contains(&inner));
        assert!(!earley_recognize(&chart, &g, &w));
    }
}
