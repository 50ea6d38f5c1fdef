//! Serial LATE: one global chart of `(rule, dot, origin, current)` items and
//! three side tables that let items be processed in any order.
//!
//! * `requests[(N, k)]` holds the items that asked for `N` at position `k`.
//! * `replies[(N, i)]` holds every `k` such that `N` spans `[i, k)`.
//! * `completed` holds the `(N, i, k)` triples already answered.
//!
//! A predict records its request before reading replies, and a complete
//! records its reply before reading requests, so whichever of the two parents
//! of an advanced item runs last produces it.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::grammar::{Grammar, RuleId, Sentence, SymbolId, SymbolKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LateItem {
    pub rule: RuleId,
    pub dot: u32,
    pub origin: u32,
    pub current: u32,
}

impl LateItem {
    pub fn new(rule: RuleId, dot: u32, origin: u32, current: u32) -> Self {
        LateItem {
            rule,
            dot,
            origin,
            current,
        }
    }

    #[inline]
    pub fn next_symbol(&self, g: &Grammar) -> Option<SymbolId> {
        g.rule(self.rule).rhs.get(self.dot as usize).copied()
    }

    /// Moves the dot one symbol right and sets the current position.
    #[inline]
    pub fn advance_to(self, current: u32) -> LateItem {
        LateItem {
            dot: self.dot + 1,
            current,
            ..self
        }
    }
}

/// Order in which pending items are taken off the work queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QueuePolicy {
    #[default]
    Fifo,
    Lifo,
    Random(u64),
}

impl std::str::FromStr for QueuePolicy {
    type Err = String;

    /// Accepts `fifo`, `lifo`, `random` (seed 0) and `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(QueuePolicy::Fifo),
            "lifo" => Ok(QueuePolicy::Lifo),
            "random" => Ok(QueuePolicy::Random(0)),
            other => other
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(QueuePolicy::Random)
                .ok_or_else(|| format!("unknown queue policy `{other}`")),
        }
    }
}

/// The global item set plus the queue of items not yet dispatched.
#[derive(Clone, Debug, Default)]
pub struct GlobalChart {
    items: FxHashSet<LateItem>,
    pending: VecDeque<LateItem>,
}

impl GlobalChart {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_items(items: FxHashSet<LateItem>) -> Self {
        GlobalChart {
            items,
            pending: VecDeque::new(),
        }
    }

    /// Inserts `item` and queues it if it is new.
    pub fn insert(&mut self, item: LateItem) -> bool {
        let fresh = self.items.insert(item);
        if fresh {
            self.pending.push_back(item);
        }
        fresh
    }

    pub fn contains(&self, item: &LateItem) -> bool {
        self.items.contains(item)
    }

    pub fn items(&self) -> &FxHashSet<LateItem> {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    fn take(&mut self, policy: QueuePolicy, rng: &mut ChaCha8Rng) -> Option<LateItem> {
        match policy {
            QueuePolicy::Fifo => self.pending.pop_front(),
            QueuePolicy::Lifo => self.pending.pop_back(),
            QueuePolicy::Random(_) => {
                if self.pending.is_empty() {
                    return None;
                }
                let i = rng.gen_range(0..self.pending.len());
                self.pending.swap_remove_back(i)
            }
        }
    }
}

/// Key of the requests and replies maps: a nonterminal and a position.
pub type TableKey = (SymbolId, u32);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseTables {
    requests: FxHashMap<TableKey, FxHashSet<LateItem>>,
    replies: FxHashMap<TableKey, FxHashSet<u32>>,
    completed: FxHashSet<(SymbolId, u32, u32)>,
}

impl ParseTables {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `item` to `requests[key]`; true iff the set was empty before.
    pub fn register_request(&mut self, key: TableKey, item: LateItem) -> bool {
        let set = self.requests.entry(key).or_default();
        set.insert(item) && set.len() == 1
    }

    /// Adds the triple to the completed set; true iff it was absent.
    pub fn claim_completion(&mut self, triple: (SymbolId, u32, u32)) -> bool {
        self.completed.insert(triple)
    }

    pub fn add_reply(&mut self, key: TableKey, end: u32) -> bool {
        self.replies.entry(key).or_default().insert(end)
    }

    pub fn requests(&self, key: TableKey) -> impl Iterator<Item = &LateItem> {
        self.requests.get(&key).into_iter().flatten()
    }

    pub fn replies(&self, key: TableKey) -> impl Iterator<Item = u32> + '_ {
        self.replies.get(&key).into_iter().flatten().copied()
    }

    pub fn is_completed(&self, triple: (SymbolId, u32, u32)) -> bool {
        self.completed.contains(&triple)
    }

    pub fn completed(&self) -> &FxHashSet<(SymbolId, u32, u32)> {
        &self.completed
    }

    pub fn request_map(&self) -> &FxHashMap<TableKey, FxHashSet<LateItem>> {
        &self.requests
    }

    pub fn reply_map(&self) -> &FxHashMap<TableKey, FxHashSet<u32>> {
        &self.replies
    }
}

/// Steps over a terminal matching the input, or over ε without consuming input.
pub fn late_scan(item: LateItem, w: &Sentence, g: &Grammar, chart: &mut GlobalChart) {
    let Some(next) = item.next_symbol(g) else { return };
    match g.kind(next) {
        SymbolKind::Epsilon => {
            chart.insert(item.advance_to(item.current));
        }
        SymbolKind::Terminal => {
            if w.get(item.current as usize) == Some(next) {
                chart.insert(item.advance_to(item.current + 1));
            }
        }
        SymbolKind::Nonterminal => {}
    }
}

pub fn late_predict(item: LateItem, g: &Grammar, chart: &mut GlobalChart, t: &mut ParseTables) {
    let Some(n) = item.next_symbol(g) else { return };
    let k = item.current;
    if t.register_request((n, k), item) {
        for &rule in g.rules_for(n) {
            chart.insert(LateItem::new(rule, 0, k, k));
        }
    }
    if let Some(ends) = t.replies.get(&(n, k)) {
        for &j in ends {
            chart.insert(item.advance_to(j));
        }
    }
}

pub fn late_complete(item: LateItem, g: &Grammar, chart: &mut GlobalChart, t: &mut ParseTables) {
    let lhs = g.rule(item.rule).lhs;
    let (i, k) = (item.origin, item.current);
    if !t.claim_completion((lhs, i, k)) {
        return;
    }
    t.add_reply((lhs, i), k);
    if let Some(waiters) = t.requests.get(&(lhs, i)) {
        for &waiter in waiters {
            chart.insert(waiter.advance_to(k));
        }
    }
}

/// A prepared serial LATE run; construction allocates and seeds, [`run`](Self::run)
/// drains the queue.
pub struct LateParser<'a> {
    grammar: &'a Grammar,
    sentence: &'a Sentence,
    chart: GlobalChart,
    tables: ParseTables,
    policy: QueuePolicy,
    rng: ChaCha8Rng,
    dispatches: usize,
}

/// Everything a serial LATE run produces.
#[derive(Clone, Debug)]
pub struct LateOutcome {
    pub chart: GlobalChart,
    pub tables: ParseTables,
    pub dispatches: usize,
}

impl<'a> LateParser<'a> {
    pub fn new(grammar: &'a Grammar, sentence: &'a Sentence) -> Self {
        Self::with_policy(grammar, sentence, QueuePolicy::Fifo)
    }

    pub fn with_policy(grammar: &'a Grammar, sentence: &'a Sentence, policy: QueuePolicy) -> Self {
        let seed = match policy {
            QueuePolicy::Random(seed) => seed,
            _ => 0,
        };
        let mut chart = GlobalChart::new();
        for &rule in grammar.rules_for(grammar.start()) {
            chart.insert(LateItem::new(rule, 0, 0, 0));
        }
        LateParser {
            grammar,
            sentence,
            chart,
            tables: ParseTables::new(),
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            dispatches: 0,
        }
    }

    pub fn run(mut self) -> LateOutcome {
        let g = self.grammar;
        while let Some(item) = self.chart.take(self.policy, &mut self.rng) {
            self.dispatches += 1;
            match item.next_symbol(g) {
                None => late_complete(item, g, &mut self.chart, &mut self.tables),
                Some(s) if g.kind(s) == SymbolKind::Nonterminal => {
                    late_predict(item, g, &mut self.chart, &mut self.tables)
                }
                Some(_) => late_scan(item, self.sentence, g, &mut self.chart),
            }
        }
        LateOutcome {
            chart: self.chart,
            tables: self.tables,
            dispatches: self.dispatches,
        }
    }
}

pub fn late_parse(g: &Grammar, w: &Sentence) -> GlobalChart {
    LateParser::new(g, w).run().chart
}

/// True iff a finished START item spanning the whole input is in the chart.
pub fn late_recognize(chart: &GlobalChart, g: &Grammar, w: &Sentence) -> bool {
    let end = w.len() as u32;
    g.rules_for(g.start()).iter().any(|&rule| {
        let len = g.rule(rule).rhs.len() as u32;
        chart.contains(&LateItem::new(rule, len, 0, end))
    })
}
