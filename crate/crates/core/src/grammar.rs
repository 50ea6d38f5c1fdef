//! Grammar representation, the text format, and the two grammar transforms
//! (nonterminal replication and wildcard wrapping).
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! START -> EXPR
//! EXPR  -> EXPR OP EXPR | NUM
//! N     -> EPSILON
//! ```
//!
//! Any symbol that appears on a left-hand side is a nonterminal; everything
//! else is a terminal. `EPSILON` stands for the empty string and must be the
//! only symbol of its alternative.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Name of the mandatory start symbol.
pub const START: &str = "START";
/// Keyword for the empty string in grammar files.
pub const EPSILON: &str = "EPSILON";
/// Default upper bound on the number of rules `replicate_nonterminals` may produce.
pub const DEFAULT_REPLICATION_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

impl RuleId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
    Epsilon,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: SymbolId,
    /// Never empty. An ε-rule has the single epsilon symbol as its body.
    pub rhs: Vec<SymbolId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("grammar has no rule for START")]
    MissingStart,
    #[error("replication would produce {produced} rules, over the cap of {cap}")]
    ReplicationCap { produced: u128, cap: usize },
    #[error("replication factor must be at least 1")]
    ZeroReplicas,
    #[error("unknown token `{token}` at position {position}")]
    UnknownToken { token: String, position: usize },
}

/// A validated context-free grammar.
///
/// Symbols are interned; the epsilon symbol is always present (id 0) even when
/// no rule uses it. Rules keep the order in which they were declared.
#[derive(Clone, Debug)]
pub struct Grammar {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymbolId>,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<RuleId>>,
    start: SymbolId,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.rules == other.rules && self.start == other.start
    }
}

impl Eq for Grammar {}

/// Builds a [`Grammar`] from named rules. Kinds are inferred at [`build`](Self::build).
#[derive(Default, Debug, Clone)]
pub struct GrammarBuilder {
    rules: Vec<(String, Vec<String>)>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `lhs -> rhs`. An empty `rhs` is shorthand for an ε-rule.
    pub fn rule<S: AsRef<str>>(mut self, lhs: &str, rhs: &[S]) -> Self {
        self.push(lhs, rhs);
        self
    }

    pub fn push<S: AsRef<str>>(&mut self, lhs: &str, rhs: &[S]) {
        let rhs = if rhs.is_empty() {
            vec![EPSILON.to_string()]
        } else {
            rhs.iter().map(|s| s.as_ref().to_string()).collect()
        };
        self.rules.push((lhs.to_string(), rhs));
    }

    pub fn build(self) -> Result<Grammar, GrammarError> {
        Grammar::from_named_rules(self.rules)
    }
}

impl Grammar {
    fn from_named_rules(named: Vec<(String, Vec<String>)>) -> Result<Grammar, GrammarError> {
        let mut symbols = vec![Symbol {
            name: EPSILON.to_string(),
            kind: SymbolKind::Epsilon,
        }];
        let mut by_name: HashMap<String, SymbolId> = HashMap::new();
        by_name.insert(EPSILON.to_string(), SymbolId(0));

        let mut intern = |name: &str, kind: SymbolKind, symbols: &mut Vec<Symbol>| -> SymbolId {
            if let Some(&id) = by_name.get(name) {
                return id;
            }
            let id = SymbolId(symbols.len() as u32);
            symbols.push(Symbol {
                name: name.to_string(),
                kind,
            });
            by_name.insert(name.to_string(), id);
            id
        };

        // Left-hand sides first so that the symbol order (and thus ids) only
        // depends on the rule list.
        for (lhs, _) in &named {
            if lhs == EPSILON {
                return Err(GrammarError::Syntax {
                    line: 0,
                    message: "EPSILON cannot be a left-hand side".into(),
                });
            }
            intern(lhs, SymbolKind::Nonterminal, &mut symbols);
        }
        let mut rules = Vec::with_capacity(named.len());
        for (lhs, rhs) in &named {
            if rhs.is_empty() {
                return Err(GrammarError::Syntax {
                    line: 0,
                    message: format!("empty right-hand side for `{lhs}`"),
                });
            }
            if rhs.len() > 1 && rhs.iter().any(|s| s == EPSILON) {
                return Err(GrammarError::Syntax {
                    line: 0,
                    message: format!("EPSILON must stand alone in a rule for `{lhs}`"),
                });
            }
            let lhs = intern(lhs, SymbolKind::Nonterminal, &mut symbols);
            let rhs = rhs
                .iter()
                .map(|s| intern(s, SymbolKind::Terminal, &mut symbols))
                .collect();
            rules.push(Rule { lhs, rhs });
        }

        let start = *by_name.get(START).ok_or(GrammarError::MissingStart)?;
        let mut by_lhs = vec![Vec::new(); symbols.len()];
        for (i, r) in rules.iter().enumerate() {
            by_lhs[r.lhs.index()].push(RuleId(i as u32));
        }
        Ok(Grammar {
            symbols,
            by_name,
            rules,
            by_lhs,
            start,
        })
    }

    pub fn builder() -> GrammarBuilder {
        GrammarBuilder::new()
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn epsilon(&self) -> SymbolId {
        SymbolId(0)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    #[inline]
    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    /// Rules whose left-hand side is `lhs`, in declaration order.
    #[inline]
    pub fn rules_for(&self, lhs: SymbolId) -> &[RuleId] {
        &self.by_lhs[lhs.index()]
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    #[inline]
    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbols[id.index()].kind
    }

    #[inline]
    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Nonterminal
    }

    /// Terminal symbols in first-appearance order.
    pub fn terminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.ids_of_kind(SymbolKind::Terminal)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.ids_of_kind(SymbolKind::Nonterminal)
    }

    fn ids_of_kind(&self, kind: SymbolKind) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.kind == kind)
            .map(|(i, _)| SymbolId(i as u32))
    }

    pub fn epsilon_rules(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.rhs.len() == 1 && r.rhs[0] == SymbolId(0))
            .map(|(i, _)| RuleId(i as u32))
    }

    pub fn has_epsilon_rules(&self) -> bool {
        self.epsilon_rules().next().is_some()
    }

    /// Formats a rule as `LHS -> a b c`.
    pub fn display_rule(&self, id: RuleId) -> String {
        let r = self.rule(id);
        let rhs: Vec<&str> = r.rhs.iter().map(|&s| self.name(s)).collect();
        format!("{} -> {}", self.name(r.lhs), rhs.join(" "))
    }

    /// Formats a dotted rule as `LHS -> a • b`.
    pub fn display_dotted(&self, id: RuleId, dot: usize) -> String {
        let r = self.rule(id);
        let mut out = String::new();
        out.push_str(self.name(r.lhs));
        out.push_str(" ->");
        for (i, &s) in r.rhs.iter().enumerate() {
            if i == dot {
                out.push_str(" •");
            }
            out.push(' ');
            out.push_str(self.name(s));
        }
        if dot == r.rhs.len() {
            out.push_str(" •");
        }
        out
    }

    fn named_rules(&self) -> Vec<(String, Vec<String>)> {
        self.rules
            .iter()
            .map(|r| {
                (
                    self.name(r.lhs).to_string(),
                    r.rhs.iter().map(|&s| self.name(s).to_string()).collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for Grammar {
    /// One rule per line, in declaration order; re-parses to an equal grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rules.len() {
            writeln!(f, "{}", self.display_rule(RuleId(i as u32)))?;
        }
        Ok(())
    }
}

/// Parses the grammar text format. Kinds are inferred from left-hand sides.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut named: Vec<(String, Vec<String>)> = Vec::new();
    let mut lhs_set: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| GrammarError::Syntax {
            line: line_no,
            message,
        };
        let mut tokens = line.split_whitespace();
        let lhs = tokens.next().unwrap();
        if lhs == "->" || lhs == "|" || lhs == EPSILON {
            return Err(syntax(format!("expected a nonterminal name, found `{lhs}`")));
        }
        match tokens.next() {
            Some("->") => {}
            Some(other) => return Err(syntax(format!("expected `->` after `{lhs}`, found `{other}`"))),
            None => return Err(syntax(format!("expected `->` after `{lhs}`"))),
        }
        let mut alternatives: Vec<Vec<String>> = vec![Vec::new()];
        for tok in tokens {
            match tok {
                "|" => alternatives.push(Vec::new()),
                "->" => return Err(syntax("unexpected `->` in right-hand side".into())),
                t => alternatives.last_mut().unwrap().push(t.to_string()),
            }
        }
        for alt in alternatives {
            if alt.is_empty() {
                return Err(syntax(format!(
                    "empty alternative for `{lhs}` (write EPSILON for the empty string)"
                )));
            }
            if alt.len() > 1 && alt.iter().any(|s| s == EPSILON) {
                return Err(syntax(
                    "EPSILON must be the only symbol of its alternative".into(),
                ));
            }
            named.push((lhs.to_string(), alt));
        }
        lhs_set.insert(lhs.to_string());
    }

    if !lhs_set.contains(START) {
        return Err(GrammarError::MissingStart);
    }
    Grammar::from_named_rules(named)
}

/// Result of checking a grammar against the classic Earley engine's restriction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EarleyCompat {
    Ok,
    /// The ε-rules the classic engine cannot handle, in declaration order.
    Rejected(Vec<RuleId>),
}

impl EarleyCompat {
    pub fn is_ok(&self) -> bool {
        matches!(self, EarleyCompat::Ok)
    }
}

pub fn validate_for_earley(g: &Grammar) -> EarleyCompat {
    let eps: Vec<RuleId> = g.epsilon_rules().collect();
    if eps.is_empty() {
        EarleyCompat::Ok
    } else {
        EarleyCompat::Rejected(eps)
    }
}

/// Number of rules `replicate_nonterminals(g, m)` would produce.
pub fn replicated_rule_count(g: &Grammar, m: usize) -> u128 {
    g.rules
        .iter()
        .map(|r| (m as u128).saturating_pow(replicated_occurrences(g, r)))
        .fold(0u128, |acc, n| acc.saturating_add(n))
}

fn replicated_occurrences(g: &Grammar, r: &Rule) -> u32 {
    std::iter::once(r.lhs)
        .chain(r.rhs.iter().copied())
        .filter(|&s| g.is_nonterminal(s) && s != g.start)
        .count() as u32
}

/// Replaces every non-START nonterminal `X` by `m` interchangeable copies
/// `X0 .. X{m-1}` and expands each rule over every choice of copies.
pub fn replicate_nonterminals(g: &Grammar, m: usize) -> Result<Grammar, GrammarError> {
    replicate_nonterminals_capped(g, m, DEFAULT_REPLICATION_CAP)
}

pub fn replicate_nonterminals_capped(g: &Grammar, m: usize, cap: usize) -> Result<Grammar, GrammarError> {
    if m == 0 {
        return Err(GrammarError::ZeroReplicas);
    }
    let produced = replicated_rule_count(g, m);
    if produced > cap as u128 {
        return Err(GrammarError::ReplicationCap { produced, cap });
    }

    let replicated = |s: SymbolId| g.is_nonterminal(s) && s != g.start;
    let copy_name = |s: SymbolId, c: usize| format!("{}{}", g.name(s), c);

    let mut named = Vec::with_capacity(produced as usize);
    for r in &g.rules {
        let slots: Vec<SymbolId> = std::iter::once(r.lhs).chain(r.rhs.iter().copied()).collect();
        let variable: Vec<usize> = (0..slots.len()).filter(|&i| replicated(slots[i])).collect();
        // Odometer over the copy index of each replicated slot.
        let mut choice = vec![0usize; variable.len()];
        loop {
            let mut names: Vec<String> = slots.iter().map(|&s| g.name(s).to_string()).collect();
            for (slot, &c) in variable.iter().zip(&choice) {
                names[*slot] = copy_name(slots[*slot], c);
            }
            let lhs = names.remove(0);
            named.push((lhs, names));

            let mut exhausted = true;
            for pos in (0..choice.len()).rev() {
                choice[pos] += 1;
                if choice[pos] < m {
                    exhausted = false;
                    break;
                }
                choice[pos] = 0;
            }
            if exhausted {
                break;
            }
        }
    }
    Grammar::from_named_rules(named)
}

fn fresh_name(g: &Grammar, base: &str) -> String {
    let mut name = base.to_string();
    while g.lookup(&name).is_some() {
        name.push('_');
    }
    name
}

/// Allows the sentence to be surrounded by any number of the grammar's own
/// terminals.
///
/// The original start symbol is renamed to a fresh `START_INNER`, and the
/// new `START` requires at least one wildcard terminal on one side or both:
///
/// ```text
/// START -> WILDS START_INNER | WILDS START_INNER WILDS | START_INNER WILDS
/// WILDS -> WILDS WILD | WILD
/// WILD  -> t            (one rule per terminal t)
/// ```
///
/// A grammar without terminals gets `WILD -> WILD` instead, and the wrapped
/// language is empty.
pub fn wrap_wildcard(g: &Grammar) -> Grammar {
    let inner = fresh_name(g, "START_INNER");
    let wilds = fresh_name(g, "WILDS");
    let wild = fresh_name(g, "WILD");
    let rename = |s: &str| if s == START { inner.clone() } else { s.to_string() };

    let mut named: Vec<(String, Vec<String>)> = vec![
        (START.into(), vec![wilds.clone(), inner.clone()]),
        (START.into(), vec![wilds.clone(), inner.clone(), wilds.clone()]),
        (START.into(), vec![inner.clone(), wilds.clone()]),
        (wilds.clone(), vec![wilds.clone(), wild.clone()]),
        (wilds.clone(), vec![wild.clone()]),
    ];
    named.extend(
        g.named_rules()
            .into_iter()
            .map(|(lhs, rhs)| (rename(&lhs), rhs.iter().map(|s| rename(s)).collect())),
    );
    for t in g.terminals() {
        named.push((wild.clone(), vec![g.name(t).to_string()]));
    }
    if g.terminals().next().is_none() {
        // No terminal to match. A self-loop keeps WILD a nonterminal that
        // derives nothing, instead of turning it into a terminal.
        named.push((wild.clone(), vec![wild.clone()]));
    }
    Grammar::from_named_rules(named).expect("wrapping a valid grammar yields a valid grammar")
}

/// An input sentence: a sequence of terminal ids of one grammar.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<SymbolId>,
}

impl Sentence {
    pub fn new(tokens: Vec<SymbolId>) -> Self {
        Sentence { tokens }
    }

    pub fn tokens(&self) -> &[SymbolId] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> Option<SymbolId> {
        self.tokens.get(k).copied()
    }

    pub fn prefix(&self, len: usize) -> Sentence {
        Sentence {
            tokens: self.tokens[..len].to_vec(),
        }
    }

    pub fn display(&self, g: &Grammar) -> String {
        let names: Vec<&str> = self.tokens.iter().map(|&t| g.name(t)).collect();
        names.join(" ")
    }
}

/// Splits `text` on whitespace and maps every token to a terminal of `g`.
pub fn tokenize(text: &str, g: &Grammar) -> Result<Sentence, GrammarError> {
    let tokens = text
        .split_whitespace()
        .enumerate()
        .map(|(position, tok)| match g.lookup(tok) {
            Some(id) if g.kind(id) == SymbolKind::Terminal => Ok(id),
            _ => Err(GrammarError::UnknownToken {
                token: tok.to_string(),
                position,
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sentence { tokens })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Grammar {
        parse_grammar(text).unwrap()
    }

    #[test]
    fn minimal_grammar() {
        let g = g("START -> a");
        assert_eq!(g.rules().len(), 1);
        let a = g.lookup("a").unwrap();
        assert_eq!(g.kind(a), SymbolKind::Terminal);
        assert_eq!(g.terminals().count(), 1);
    }

    #[test]
    fn self_recursive_grammar() {
        let g = g("START -> START START\nSTART -> a");
        assert_eq!(g.rules().len(), 2);
        assert_eq!(g.rule(RuleId(0)).rhs, vec![g.start(), g.start()]);
    }

    #[test]
    fn epsilon_rule() {
        let g = g("START -> N N\nN -> EPSILON");
        let n = g.lookup("N").unwrap();
        assert!(g.is_nonterminal(n));
        assert_eq!(g.rule(RuleId(1)).rhs, vec![g.epsilon()]);
        assert_eq!(g.epsilon_rules().collect::<Vec<_>>(), vec![RuleId(1)]);
    }

    #[test]
    fn alternatives_and_comments() {
        let g = g("# arithmetic\nSTART -> E\nE -> E + E | n   # trailing\n\n");
        assert_eq!(g.rules().len(), 3);
        assert_eq!(g.display_rule(RuleId(1)), "E -> E + E");
        assert_eq!(g.display_rule(RuleId(2)), "E -> n");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_grammar("START -> a\nB a\n").unwrap_err();
        assert!(matches!(err, GrammarError::Syntax { line: 2, .. }), "{err}");
        let err = parse_grammar("START -> a |\n").unwrap_err();
        assert!(matches!(err, GrammarError::Syntax { line: 1, .. }));
        let err = parse_grammar("\nSTART -> a EPSILON").unwrap_err();
        assert!(matches!(err, GrammarError::Syntax { line: 2, .. }));
        let err = parse_grammar("START -> a\nEPSILON -> a").unwrap_err();
        assert!(matches!(err, GrammarError::Syntax { line: 2, .. }));
    }

    #[test]
    fn missing_start() {
        assert_eq!(parse_grammar("A -> a").unwrap_err(), GrammarError::MissingStart);
        assert_eq!(parse_grammar("").unwrap_err(), GrammarError::MissingStart);
    }

    #[test]
    fn undefined_nonterminals_are_terminals() {
        // Without a rule, a symbol is a terminal by definition of the format.
        let g = g("START -> B");
        assert_eq!(g.kind(g.lookup("B").unwrap()), SymbolKind::Terminal);
    }

    #[test]
    fn serialization_is_idempotent() {
        let g1 = g("START -> E\nE -> E + E | n | EPSILON");
        let g2 = parse_grammar(&g1.to_string()).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.to_string(), g2.to_string());
    }

    #[test]
    fn validate_for_earley_lists_epsilon_rules() {
        assert!(validate_for_earley(&g("START -> a")).is_ok());
        assert_eq!(
            validate_for_earley(&g("START -> N N\nN -> EPSILON")),
            EarleyCompat::Rejected(vec![RuleId(1)])
        );
        assert_eq!(
            validate_for_earley(&g("START -> A B\nA -> EPSILON | a\nB -> EPSILON")),
            EarleyCompat::Rejected(vec![RuleId(1), RuleId(3)])
        );
    }

    #[test]
    fn replicate_identity() {
        let src = g("START -> N\nN -> a N | a");
        let r = replicate_nonterminals(&src, 1).unwrap();
        assert_eq!(r.to_string(), "START -> N0\nN0 -> a N0\nN0 -> a\n");
    }

    #[test]
    fn replicate_two_copies() {
        let src = g("START -> N\nN -> a");
        let r = replicate_nonterminals(&src, 2).unwrap();
        assert_eq!(r.to_string(), "START -> N0\nSTART -> N1\nN0 -> a\nN1 -> a\n");
    }

    #[test]
    fn replicate_counts_follow_occurrences() {
        // START -> START E   : 1 replicated occurrence
        // E -> E + E         : 3
        // E -> n             : 1
        let src = g("START -> START E | E\nE -> E + E | n");
        for m in 1..=4usize {
            let r = replicate_nonterminals(&src, m).unwrap();
            assert_eq!(r.rules().len(), m + m + m.pow(3) + m);
            assert_eq!(replicated_rule_count(&src, m), r.rules().len() as u128);
            assert_eq!(r.terminals().count(), src.terminals().count());
        }
    }

    #[test]
    fn replicate_cap_and_zero() {
        let src = g("START -> E\nE -> E E E E | n");
        assert!(matches!(
            replicate_nonterminals_capped(&src, 10, 1000),
            Err(GrammarError::ReplicationCap { .. })
        ));
        assert_eq!(replicate_nonterminals(&src, 0), Err(GrammarError::ZeroReplicas));
    }

    #[test]
    fn wrap_adds_five_plus_terminal_rules() {
        let src = g("START -> a B\nB -> b | c");
        let w = wrap_wildcard(&src);
        assert_eq!(w.rules().len(), src.rules().len() + 5 + 3);
        let mut t1: Vec<&str> = src.terminals().map(|t| src.name(t)).collect();
        let mut t2: Vec<&str> = w.terminals().map(|t| w.name(t)).collect();
        t1.sort();
        t2.sort();
        assert_eq!(t1, t2);
        assert!(w.lookup("START_INNER").is_some());
    }

    #[test]
    fn wrap_without_terminals_stays_empty() {
        let src = g("START -> EPSILON");
        let w = wrap_wildcard(&src);
        assert_eq!(w.terminals().count(), 0);
        assert!(w.is_nonterminal(w.lookup("WILD").unwrap()));
    }

    #[test]
    fn wrap_avoids_name_clashes() {
        let src = g("START -> WILD\nWILD -> a");
        let w = wrap_wildcard(&src);
        assert!(w.lookup("WILD_").is_some());
        assert_eq!(w.rules().len(), 2 + 5 + 1);
    }

    #[test]
    fn tokenize_cases() {
        let g = g("START -> E\nE -> E OP E | NUM\nOP -> + | *\nNUM -> 3 | 5 | 6");
        assert_eq!(tokenize("5 + 6 * 3", &g).unwrap().len(), 5);
        assert!(tokenize("", &g).unwrap().is_empty());
        assert_eq!(
            tokenize("5 q", &g).unwrap_err(),
            GrammarError::UnknownToken {
                token: "q".into(),
                position: 1
            }
        );
        // Nonterminal names are not tokens.
        assert!(tokenize("NUM", &g).is_err());
    }

    #[test]
    fn dotted_display() {
        let g = g("START -> a b\nN -> EPSILON");
        assert_eq!(g.display_dotted(RuleId(0), 0), "START -> • a b");
        assert_eq!(g.display_dotted(RuleId(0), 1), "START -> a • b");
        assert_eq!(g.display_dotted(RuleId(0), 2), "START -> a b •");
        assert_eq!(g.display_dotted(RuleId(1), 1), "N -> EPSILON •");
    }
}
