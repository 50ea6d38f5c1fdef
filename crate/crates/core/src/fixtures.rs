//! Bundled grammars and random instance generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::grammar::{parse_grammar, tokenize, Grammar, GrammarBuilder, Sentence, SymbolId, SymbolKind};

/// A bundled grammar with sample sentences.
#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub grammar: &'static str,
    pub sentences: &'static str,
}

macro_rules! fixture {
    ($name:literal) => {
        Fixture {
            name: $name,
            grammar: include_str!(concat!("../fixtures/", $name, ".g")),
            sentences: include_str!(concat!("../fixtures/", $name, ".sentences")),
        }
    };
}

pub const ARITH: Fixture = fixture!("arith");
pub const MINILANG: Fixture = fixture!("minilang");
pub const ENGLISH: Fixture = fixture!("english");
pub const EPSILON: Fixture = fixture!("epsilon");
pub const OPTIONAL: Fixture = fixture!("optional");
pub const PAIRS: Fixture = fixture!("pairs");
pub const TINY: Fixture = fixture!("tiny");
/// `wrap_wildcard` applied to [`ENGLISH`].
pub const ENGLISH_WILD: Fixture = fixture!("english-wild");

pub const ALL: &[Fixture] = &[
    ARITH,
    MINILANG,
    ENGLISH,
    ENGLISH_WILD,
    EPSILON,
    OPTIONAL,
    PAIRS,
    TINY,
];

impl Fixture {
    pub fn grammar(&self) -> Grammar {
        parse_grammar(self.grammar).expect("bundled grammar parses")
    }

    /// The sample sentences, tokenized against `g`. Lines that do not
    /// tokenize are skipped.
    pub fn sentences(&self, g: &Grammar) -> Vec<Sentence> {
        sentences_from_text(self.sentences, g)
    }
}

/// One sentence per line; an empty line is the empty sentence.
pub fn sentences_from_text(text: &str, g: &Grammar) -> Vec<Sentence> {
    text.lines().filter_map(|l| tokenize(l, g).ok()).collect()
}

/// A left-leaning arithmetic expression of `tokens` tokens (rounded down to
/// an odd count), cycling through digits and operators.
pub fn arith_expression(tokens: usize) -> String {
    let tokens = if tokens.is_multiple_of(2) {
        tokens.saturating_sub(1)
    } else {
        tokens
    };
    (0..tokens)
        .map(|i| {
            if i % 2 == 0 {
                ((i / 2 * 7 + 3) % 10).to_string()
            } else if i % 4 == 1 {
                "+".to_string()
            } else {
                "*".to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Copy, Debug)]
pub struct RandomGrammarParams {
    pub max_rules: usize,
    pub max_rhs: usize,
    /// Chance that a rule is an ε-rule.
    pub epsilon_rate: f64,
    /// Force at least one ε-rule.
    pub require_epsilon: bool,
}

impl RandomGrammarParams {
    pub fn epsilon_free() -> Self {
        RandomGrammarParams {
            max_rules: 8,
            max_rhs: 3,
            epsilon_rate: 0.0,
            require_epsilon: false,
        }
    }

    pub fn nullable() -> Self {
        RandomGrammarParams {
            max_rules: 8,
            max_rhs: 3,
            epsilon_rate: 0.2,
            require_epsilon: true,
        }
    }
}

const NONTERMINALS: [&str; 4] = ["START", "A", "B", "C"];
const TERMINALS: [&str; 3] = ["a", "b", "c"];

/// A random grammar over nonterminals START, A, B, C and terminals a, b, c.
/// Every nonterminal used has at least one rule.
pub fn random_grammar<R: Rng>(rng: &mut R, params: &RandomGrammarParams) -> Grammar {
    let nts = &NONTERMINALS[..rng.gen_range(1..=NONTERMINALS.len().min(params.max_rules))];
    let total = rng.gen_range(nts.len()..=params.max_rules.max(nts.len()));
    let mut lhs: Vec<&str> = nts.to_vec();
    while lhs.len() < total {
        lhs.push(nts.choose(rng).unwrap());
    }
    let forced_eps = if params.require_epsilon {
        Some(rng.gen_range(0..lhs.len()))
    } else {
        None
    };
    let mut builder = GrammarBuilder::new();
    for (i, l) in lhs.iter().enumerate() {
        if forced_eps == Some(i) || rng.gen_bool(params.epsilon_rate) {
            builder.push::<&str>(l, &[]);
            continue;
        }
        let len = rng.gen_range(1..=params.max_rhs);
        let rhs: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.45) {
                    *nts.choose(rng).unwrap()
                } else {
                    *TERMINALS.choose(rng).unwrap()
                }
            })
            .collect();
        builder.push(l, &rhs);
    }
    builder.build().expect("generated grammar is valid")
}

/// A random sentence of at most `max_len` tokens. Half the time it is
/// sampled from a bounded random derivation (so it is likely in the
/// language), otherwise it is a uniform string over the grammar's terminals.
pub fn random_sentence<R: Rng>(rng: &mut R, g: &Grammar, max_len: usize) -> Sentence {
    if rng.gen_bool(0.5) {
        if let Some(s) = sample_derivation(rng, g, max_len) {
            return s;
        }
    }
    let terminals: Vec<SymbolId> = g.terminals().collect();
    if terminals.is_empty() {
        return Sentence::default();
    }
    let len = rng.gen_range(0..=max_len);
    Sentence::new((0..len).map(|_| *terminals.choose(rng).unwrap()).collect())
}

fn sample_derivation<R: Rng>(rng: &mut R, g: &Grammar, max_len: usize) -> Option<Sentence> {
    let mut form = vec![g.start()];
    let mut out = Vec::new();
    let mut steps = 0;
    while let Some(sym) = form.pop() {
        match g.kind(sym) {
            SymbolKind::Terminal => {
                out.push(sym);
                if out.len() > max_len {
                    return None;
                }
            }
            SymbolKind::Epsilon => {}
            SymbolKind::Nonterminal => {
                steps += 1;
                if steps > 8 * (max_len + 1) {
                    return None;
                }
                let rule = g.rule(*g.rules_for(sym).choose(rng)?);
                form.extend(rule.rhs.iter().rev());
            }
        }
        if form.len() > 4 * (max_len + 1) {
            return None;
        }
    }
    Some(Sentence::new(out))
}
