//! Cross-engine chart comparison and an independent recognition oracle.
//!
//! The oracle enumerates leftmost derivations and shares no code with the
//! chart parsers.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::earley::EarleyChart;
use crate::grammar::{Grammar, RuleId, Sentence, SymbolId, SymbolKind};
use crate::late::GlobalChart;

/// Largest sentence the oracle accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 10;

/// An item as `(current, rule, dot, origin)`.
pub type CanonicalItem = (u32, RuleId, u32, u32);

/// A chart as a strictly sorted list of items, comparable across engines.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CanonicalChart {
    items: Vec<CanonicalItem>,
}

impl CanonicalChart {
    pub fn from_items(mut items: Vec<CanonicalItem>) -> Self {
        items.sort_unstable();
        items.dedup();
        CanonicalChart { items }
    }

    pub fn items(&self) -> &[CanonicalItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Text dump, one item per line as `k<TAB>LHS -> pre • post<TAB>origin`,
    /// lines sorted bytewise.
    pub fn dump(&self, g: &Grammar) -> String {
        let mut lines: Vec<String> = self.items.iter().map(|item| dump_line(g, item)).collect();
        lines.sort_unstable();
        let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}

pub fn dump_line(g: &Grammar, &(k, rule, dot, origin): &CanonicalItem) -> String {
    format!("{k}\t{}\t{origin}", g.display_dotted(rule, dot as usize))
}

pub fn canonicalize_earley(chart: &EarleyChart) -> CanonicalChart {
    let items = chart
        .sets()
        .iter()
        .enumerate()
        .flat_map(|(k, set)| {
            set.items()
                .iter()
                .map(move |it| (k as u32, it.rule, it.dot, it.origin))
        })
        .collect();
    CanonicalChart::from_items(items)
}

pub fn canonicalize_late(chart: &GlobalChart) -> CanonicalChart {
    let items = chart
        .items()
        .iter()
        .map(|it| (it.current, it.rule, it.dot, it.origin))
        .collect();
    CanonicalChart::from_items(items)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChartDiff {
    pub only_in_a: Vec<CanonicalItem>,
    pub only_in_b: Vec<CanonicalItem>,
}

impl ChartDiff {
    pub fn is_empty(&self) -> bool {
        self.only_in_a.is_empty() && self.only_in_b.is_empty()
    }

    pub fn render(&self, g: &Grammar) -> String {
        let mut out = String::new();
        for it in &self.only_in_a {
            out.push_str("- ");
            out.push_str(&dump_line(g, it));
            out.push('\n');
        }
        for it in &self.only_in_b {
            out.push_str("+ ");
            out.push_str(&dump_line(g, it));
            out.push('\n');
        }
        out
    }
}

/// Compares two canonical charts with a merge walk.
pub fn charts_equal(a: &CanonicalChart, b: &CanonicalChart) -> (bool, ChartDiff) {
    let mut diff = ChartDiff::default();
    let (mut i, mut j) = (0, 0);
    while i < a.items.len() && j < b.items.len() {
        match a.items[i].cmp(&b.items[j]) {
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                diff.only_in_a.push(a.items[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                diff.only_in_b.push(b.items[j]);
                j += 1;
            }
        }
    }
    diff.only_in_a.extend_from_slice(&a.items[i..]);
    diff.only_in_b.extend_from_slice(&b.items[j..]);
    (diff.is_empty(), diff)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("sentence of length {len} exceeds the oracle cap of {cap}")]
    CapExceeded { len: usize, cap: usize },
}

/// Minimum terminal-string length derivable from each symbol, by fixpoint.
/// Nonterminals that derive no terminal string get `usize::MAX`.
pub fn min_lengths(g: &Grammar) -> Vec<usize> {
    let mut min: Vec<usize> = g
        .symbols()
        .iter()
        .map(|s| match s.kind {
            SymbolKind::Terminal => 1,
            SymbolKind::Epsilon => 0,
            SymbolKind::Nonterminal => usize::MAX,
        })
        .collect();
    loop {
        let mut changed = false;
        for r in g.rules() {
            let len = r.rhs.iter().try_fold(0usize, |acc, s| match min[s.index()] {
                usize::MAX => None,
                m => Some(acc + m),
            });
            if let Some(len) = len {
                if len < min[r.lhs.index()] {
                    min[r.lhs.index()] = len;
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

/// Does START derive `w`? Uses [`DEFAULT_ORACLE_CAP`].
pub fn brute_force_recognize(g: &Grammar, w: &Sentence) -> Result<bool, OracleError> {
    brute_force_recognize_capped(g, w, DEFAULT_ORACLE_CAP)
}

/// Breadth-first search over leftmost sentential forms.
///
/// ε-rules are first eliminated (each rule is expanded over every subset of
/// its nullable occurrences; empty bodies are dropped), so every nonterminal
/// in a form derives at least one terminal. Forms are pruned when their
/// terminal prefix disagrees with `w` or their minimum derivable length
/// exceeds `|w|`; that bounds form length by `|w|`, and a visited set over the
/// finitely many remaining forms makes the search terminate even on cyclic
/// grammars. The empty sentence is decided directly: START must be nullable.
pub fn brute_force_recognize_capped(g: &Grammar, w: &Sentence, cap: usize) -> Result<bool, OracleError> {
    if w.len() > cap {
        return Err(OracleError::CapExceeded { len: w.len(), cap });
    }
    let min = min_lengths(g);
    if w.is_empty() {
        return Ok(min[g.start().index()] == 0);
    }
    let rules = eliminate_epsilon(g, &min);
    let mut by_lhs: Vec<Vec<&[SymbolId]>> = vec![Vec::new(); g.symbols().len()];
    for (lhs, rhs) in &rules {
        by_lhs[lhs.index()].push(rhs);
    }
    // After elimination each productive symbol derives at least one terminal.
    let weight = |s: SymbolId| -> usize {
        match g.kind(s) {
            SymbolKind::Nonterminal if min[s.index()] == usize::MAX => usize::MAX,
            SymbolKind::Nonterminal => min[s.index()].max(1),
            _ => 1,
        }
    };
    let target = w.tokens();

    // A state is (matched prefix length, remaining form).
    let mut seen: HashSet<(usize, Vec<SymbolId>)> = HashSet::new();
    let mut queue: VecDeque<(usize, Vec<SymbolId>)> = VecDeque::new();
    let start = (0usize, vec![g.start()]);
    seen.insert(start.clone());
    queue.push_back(start);

    while let Some((matched, form)) = queue.pop_front() {
        let first = form[0];
        for rhs in &by_lhs[first.index()] {
            let mut next: Vec<SymbolId> = Vec::with_capacity(rhs.len() + form.len() - 1);
            next.extend_from_slice(rhs);
            next.extend_from_slice(&form[1..]);
            // Consume leading terminals.
            let mut pos = matched;
            let mut cut = 0;
            let mut ok = true;
            while cut < next.len() && g.kind(next[cut]) == SymbolKind::Terminal {
                if target.get(pos) != Some(&next[cut]) {
                    ok = false;
                    break;
                }
                pos += 1;
                cut += 1;
            }
            if !ok {
                continue;
            }
            let rest = next.split_off(cut);
            if rest.is_empty() {
                if pos == target.len() {
                    return Ok(true);
                }
                continue;
            }
            let need = rest.iter().try_fold(0usize, |acc, &s| match weight(s) {
                usize::MAX => None,
                m => Some(acc + m),
            });
            match need {
                Some(need) if pos + need <= target.len() => {}
                _ => continue,
            }
            let state = (pos, rest);
            if seen.insert(state.clone()) {
                queue.push_back(state);
            }
        }
    }
    Ok(false)
}

fn eliminate_epsilon(g: &Grammar, min: &[usize]) -> Vec<(SymbolId, Vec<SymbolId>)> {
    let nullable = |s: SymbolId| g.kind(s) == SymbolKind::Nonterminal && min[s.index()] == 0;
    let mut out: HashSet<(SymbolId, Vec<SymbolId>)> = HashSet::new();
    for r in g.rules() {
        let body: Vec<SymbolId> = r
            .rhs
            .iter()
            .copied()
            .filter(|&s| g.kind(s) != SymbolKind::Epsilon)
            .collect();
        let optional: Vec<usize> = (0..body.len()).filter(|&i| nullable(body[i])).collect();
        for mask in 0u64..(1u64 << optional.len()) {
            let dropped: HashSet<usize> = optional
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect();
            let rhs: Vec<SymbolId> = body
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, &s)| s)
                .collect();
            if !rhs.is_empty() && !(rhs.len() == 1 && rhs[0] == r.lhs) {
                out.insert((r.lhs, rhs));
            }
        }
    }
    let mut rules: Vec<_> = out.into_iter().collect();
    rules.sort();
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::earley::{earley_parse, EarleyChart};
    use crate::grammar::{parse_grammar, tokenize};
    use crate::late::late_parse;

    fn recognize(grammar: &str, input: &str) -> bool {
        let g = parse_grammar(grammar).unwrap();
        let w = tokenize(input, &g).unwrap();
        brute_force_recognize(&g, &w).unwrap()
    }

    #[test]
    fn empty_charts() {
        assert!(canonicalize_earley(&EarleyChart::new(3)).is_empty());
        assert!(canonicalize_late(&GlobalChart::new()).is_empty());
    }

    #[test]
    fn tiny_canonical_form() {
        let g = parse_grammar("START -> a").unwrap();
        let w = tokenize("a", &g).unwrap();
        let expected = vec![(0, RuleId(0), 0, 0), (1, RuleId(0), 1, 0)];
        let e = canonicalize_earley(&earley_parse(&g, &w).unwrap());
        let l = canonicalize_late(&late_parse(&g, &w));
        assert_eq!(e.items(), expected.as_slice());
        assert_eq!(l.items(), expected.as_slice());
        assert_eq!(e.dump(&g), "0\tSTART -> • a\t0\n1\tSTART -> a •\t0\n");
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let g = parse_grammar("START -> START START | a").unwrap();
        let w = tokenize("a a a", &g).unwrap();
        let c = canonicalize_late(&late_parse(&g, &w));
        assert_eq!(CanonicalChart::from_items(c.items().to_vec()), c);
    }

    #[test]
    fn diff_reports_extras() {
        let x = CanonicalChart::from_items(vec![(0, RuleId(0), 0, 0), (1, RuleId(0), 1, 0)]);
        assert_eq!(charts_equal(&x, &x), (true, ChartDiff::default()));
        let extra = (1, RuleId(1), 0, 1);
        let mut more = x.items().to_vec();
        more.push(extra);
        let y = CanonicalChart::from_items(more);
        let (eq, diff) = charts_equal(&x, &y);
        assert!(!eq);
        assert!(diff.only_in_a.is_empty());
        assert_eq!(diff.only_in_b, vec![extra]);
        let (_, rev) = charts_equal(&y, &x);
        assert_eq!(rev.only_in_a, vec![extra]);
    }

    #[test]
    fn oracle_basics() {
        assert!(recognize("START -> a", "a"));
        assert!(!recognize("START -> a", ""));
        assert!(!recognize("START -> a", "a a"));
        assert!(recognize("START -> N N\nN -> EPSILON", ""));
        assert!(!recognize("START -> START START | a", ""));
        assert!(recognize("START -> START START | a", "a a a a a"));
    }

    #[test]
    fn oracle_handles_cycles_and_nullables() {
        assert!(recognize("START -> A\nA -> B | a\nB -> A", "a"));
        assert!(!recognize("START -> A\nA -> B\nB -> A", ""));
        assert!(recognize("START -> A A A b\nA -> A A | EPSILON | a", "a b"));
        assert!(recognize("START -> A START | b\nA -> EPSILON", "b"));
        assert!(!recognize("START -> A b\nA -> A a", "a b"));
    }

    #[test]
    fn oracle_cap() {
        let g = parse_grammar("START -> START a | a").unwrap();
        let w = tokenize("a a a", &g).unwrap();
        assert_eq!(
            brute_force_recognize_capped(&g, &w, 2),
            Err(OracleError::CapExceeded { len: 3, cap: 2 })
        );
    }

    #[test]
    fn min_length_table() {
        let g = parse_grammar("START -> A B\nA -> a a | EPSILON\nB -> b B\nC -> c").unwrap();
        let min = min_lengths(&g);
        let at = |n: &str| min[g.lookup(n).unwrap().index()];
        assert_eq!(at("A"), 0);
        assert_eq!(at("C"), 1);
        assert_eq!(at("B"), usize::MAX);
        assert_eq!(at("START"), usize::MAX);
    }
}
