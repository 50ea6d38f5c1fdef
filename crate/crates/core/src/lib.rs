//! Context-free grammar recognition with three interchangeable engines:
//!
//! * [`earley`]: the classic serial Earley recognizer (ε-free grammars only),
//! * [`late`]: serial LATE, which keeps requests/replies/completed tables so
//!   that items can be processed in any order and ε-rules work,
//! * [`parallel`]: LATE on a shared work queue with concurrent tables.
//!
//! All three produce the same chart on ε-free inputs; [`verify`] compares
//! charts and holds a brute-force recognition oracle. [`bench`] measures
//! runtime, speedup and efficiency.

pub mod bench;
pub mod earley;
pub mod fixtures;
pub mod grammar;
pub mod late;
pub mod parallel;
pub mod verify;

pub use earley::{earley_parse, earley_recognize, EarleyChart, EarleyError, EarleyParser, Item};
pub use grammar::{
    parse_grammar, replicate_nonterminals, tokenize, validate_for_earley, wrap_wildcard, EarleyCompat,
    Grammar, GrammarError, RuleId, Sentence, SymbolId, SymbolKind,
};
pub use late::{late_parse, late_recognize, GlobalChart, LateItem, LateParser, ParseTables, QueuePolicy};
pub use parallel::{late_parse_parallel, ParallelConfig, ParallelError, ParallelLateParser};
pub use verify::{
    brute_force_recognize, canonicalize_earley, canonicalize_late, charts_equal, CanonicalChart, ChartDiff,
};
