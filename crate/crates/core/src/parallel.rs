//! Parallel LATE over a shared work queue.
//!
//! Workers pull items from per-thread deques (stealing from each other and a
//! global injector when idle). The chart, requests, replies and completed
//! sets are concurrent maps whose only mutations are linearizable
//! insert-and-report operations. The two ordering constraints are kept per
//! worker: a predict registers its request before it reads replies, and a
//! complete adds its reply before it reads requests. Each map takes a lock per
//! shard, so whichever of two racing parents acquires the second map last is
//! guaranteed to see the other's write.
//!
//! Termination uses a global counter of outstanding items: it is incremented
//! for each new item before the item is queued and decremented only after the
//! item's dispatch has queued all of its children, so it reaches zero exactly
//! at quiescence.

use std::iter;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use crossbeam::deque::{Injector, Steal, Stealer, Worker};
use crossbeam::utils::Backoff;
use dashmap::{DashMap, DashSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxBuildHasher, FxHashSet};
use thiserror::Error;

use crate::grammar::{Grammar, Sentence, SymbolId, SymbolKind};
use crate::late::{GlobalChart, LateItem, QueuePolicy, TableKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParallelError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("worker panicked: {0}")]
    WorkerPanicked(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParallelConfig {
    pub workers: usize,
    pub queue_policy: QueuePolicy,
}

impl ParallelConfig {
    pub fn new(workers: usize, queue_policy: QueuePolicy) -> Result<Self, ParallelError> {
        if workers == 0 {
            return Err(ParallelError::NoWorkers);
        }
        Ok(ParallelConfig {
            workers,
            queue_policy,
        })
    }

    pub fn with_workers(workers: usize) -> Result<Self, ParallelError> {
        Self::new(workers, QueuePolicy::Fifo)
    }
}

/// Runs `dispatch` on every seed and on every item it produces until no work
/// is left. `dispatch` pushes the new items it creates onto the vector it is
/// given. Returns the number of dispatches.
pub fn run_to_quiescence<T, F>(
    seeds: Vec<T>,
    cfg: &ParallelConfig,
    dispatch: F,
) -> Result<usize, ParallelError>
where
    T: Send,
    F: Fn(T, &mut Vec<T>) + Sync,
{
    if cfg.workers == 0 {
        return Err(ParallelError::NoWorkers);
    }
    let injector = Injector::new();
    let outstanding = AtomicUsize::new(seeds.len());
    for s in seeds {
        injector.push(s);
    }
    let locals: Vec<Worker<T>> = (0..cfg.workers)
        .map(|_| match cfg.queue_policy {
            QueuePolicy::Lifo => Worker::new_lifo(),
            QueuePolicy::Fifo | QueuePolicy::Random(_) => Worker::new_fifo(),
        })
        .collect();
    let stealers: Vec<Stealer<T>> = locals.iter().map(Worker::stealer).collect();
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<String>> = Mutex::new(None);
    let dispatches = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for (index, local) in locals.into_iter().enumerate() {
            let ctx = WorkerCtx {
                index,
                injector: &injector,
                stealers: &stealers,
                outstanding: &outstanding,
                abort: &abort,
            };
            let dispatch = &dispatch;
            let failure = &failure;
            let dispatches = &dispatches;
            let policy = cfg.queue_policy;
            scope.spawn(move || {
                let result = panic::catch_unwind(AssertUnwindSafe(|| ctx.work(&local, policy, dispatch)));
                match result {
                    Ok(n) => {
                        dispatches.fetch_add(n, Ordering::Relaxed);
                    }
                    Err(payload) => {
                        ctx.abort.store(true, Ordering::SeqCst);
                        let msg = payload
                            .downcast_ref::<&str>()
                            .map(|s| s.to_string())
                            .or_else(|| payload.downcast_ref::<String>().cloned())
                            .unwrap_or_else(|| "unknown panic".to_string());
                        failure.lock().unwrap().get_or_insert(msg);
                    }
                }
            });
        }
    });

    match failure.into_inner().unwrap() {
        Some(msg) => Err(ParallelError::WorkerPanicked(msg)),
        None => Ok(dispatches.into_inner()),
    }
}

struct WorkerCtx<'a, T> {
    index: usize,
    injector: &'a Injector<T>,
    stealers: &'a [Stealer<T>],
    outstanding: &'a AtomicUsize,
    abort: &'a AtomicBool,
}

impl<T> WorkerCtx<'_, T> {
    fn find_task(&self, local: &Worker<T>) -> Option<T> {
        local.pop().or_else(|| {
            iter::repeat_with(|| {
                self.injector.steal_batch_and_pop(local).or_else(|| {
                    self.stealers
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != self.index)
                        .map(|(_, s)| s.steal())
                        .collect::<Steal<T>>()
                })
            })
            .find(|s| !s.is_retry())
            .and_then(Steal::success)
        })
    }

    fn work<F>(&self, local: &Worker<T>, policy: QueuePolicy, dispatch: &F) -> usize
    where
        F: Fn(T, &mut Vec<T>),
    {
        let mut rng = match policy {
            QueuePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(
                seed ^ (self.index as u64).rotate_left(32),
            )),
            _ => None,
        };
        let mut children = Vec::new();
        let mut count = 0;
        let backoff = Backoff::new();
        loop {
            if self.abort.load(Ordering::Relaxed) {
                return count;
            }
            match self.find_task(local) {
                Some(task) => {
                    backoff.reset();
                    dispatch(task, &mut children);
                    count += 1;
                    if let Some(rng) = rng.as_mut() {
                        children.shuffle(rng);
                    }
                    self.outstanding.fetch_add(children.len(), Ordering::SeqCst);
                    for child in children.drain(..) {
                        local.push(child);
                    }
                    self.outstanding.fetch_sub(1, Ordering::SeqCst);
                }
                None => {
                    if self.outstanding.load(Ordering::SeqCst) == 0 {
                        return count;
                    }
                    if backoff.is_completed() {
                        std::thread::yield_now();
                    } else {
                        backoff.snooze();
                    }
                }
            }
        }
    }
}

/// Concurrent requests, replies and completed sets.
#[derive(Debug, Default)]
pub struct ConcurrentTables {
    requests: DashMap<TableKey, FxHashSet<LateItem>, FxBuildHasher>,
    replies: DashMap<TableKey, FxHashSet<u32>, FxBuildHasher>,
    completed: DashSet<(SymbolId, u32, u32), FxBuildHasher>,
}

impl ConcurrentTables {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `item` to `requests[key]`. Returns true iff the set was empty
    /// immediately before, observed under the same lock as the insertion, so
    /// exactly one caller per key ever gets `true`.
    pub fn atomic_request_register(&self, key: TableKey, item: LateItem) -> bool {
        let mut set = self.requests.entry(key).or_default();
        set.insert(item) && set.len() == 1
    }

    /// Inserts the triple into the completed set; true iff this call added it.
    pub fn atomic_complete_claim(&self, triple: (SymbolId, u32, u32)) -> bool {
        self.completed.insert(triple)
    }

    pub fn add_reply(&self, key: TableKey, end: u32) -> bool {
        self.replies.entry(key).or_default().insert(end)
    }

    pub fn replies_into(&self, key: TableKey, out: &mut Vec<u32>) {
        out.clear();
        if let Some(set) = self.replies.get(&key) {
            out.extend(set.iter().copied());
        }
    }

    pub fn requests_into(&self, key: TableKey, out: &mut Vec<LateItem>) {
        out.clear();
        if let Some(set) = self.requests.get(&key) {
            out.extend(set.iter().copied());
        }
    }

    pub fn request_count(&self, key: TableKey) -> usize {
        self.requests.get(&key).map_or(0, |s| s.len())
    }

    pub fn is_completed(&self, triple: (SymbolId, u32, u32)) -> bool {
        self.completed.contains(&triple)
    }

    pub fn completed_len(&self) -> usize {
        self.completed.len()
    }

    pub fn replies_snapshot(&self) -> Vec<(TableKey, Vec<u32>)> {
        self.replies
            .iter()
            .map(|e| (*e.key(), e.value().iter().copied().collect()))
            .collect()
    }
}

type ConcurrentChart = DashSet<LateItem, FxBuildHasher>;

#[derive(Debug)]
pub struct ParallelOutcome {
    pub chart: GlobalChart,
    pub tables: ConcurrentTables,
    pub dispatches: usize,
}

/// A prepared parallel LATE run: construction allocates the shared state,
/// [`run`](Self::run) builds the chart.
pub struct ParallelLateParser<'a> {
    grammar: &'a Grammar,
    sentence: &'a Sentence,
    cfg: ParallelConfig,
    chart: ConcurrentChart,
    tables: ConcurrentTables,
    seeds: Vec<LateItem>,
}

impl<'a> ParallelLateParser<'a> {
    pub fn new(
        grammar: &'a Grammar,
        sentence: &'a Sentence,
        cfg: ParallelConfig,
    ) -> Result<Self, ParallelError> {
        if cfg.workers == 0 {
            return Err(ParallelError::NoWorkers);
        }
        let chart = ConcurrentChart::default();
        let mut seeds = Vec::new();
        for &rule in grammar.rules_for(grammar.start()) {
            let item = LateItem::new(rule, 0, 0, 0);
            if chart.insert(item) {
                seeds.push(item);
            }
        }
        Ok(ParallelLateParser {
            grammar,
            sentence,
            cfg,
            chart,
            tables: ConcurrentTables::new(),
            seeds,
        })
    }

    /// Builds the chart to quiescence and returns the dispatch count. The
    /// seeds are consumed, so a second call does nothing.
    pub fn build(&mut self) -> Result<usize, ParallelError> {
        let g = self.grammar;
        let w = self.sentence;
        let chart = &self.chart;
        let tables = &self.tables;
        let seeds = std::mem::take(&mut self.seeds);
        run_to_quiescence(seeds, &self.cfg, |item, out| {
            dispatch(item, g, w, chart, tables, out)
        })
    }

    pub fn finish(self, dispatches: usize) -> ParallelOutcome {
        let items: FxHashSet<LateItem> = self.chart.into_iter().collect();
        ParallelOutcome {
            chart: GlobalChart::from_items(items),
            tables: self.tables,
            dispatches,
        }
    }

    pub fn run(mut self) -> Result<ParallelOutcome, ParallelError> {
        let dispatches = self.build()?;
        Ok(self.finish(dispatches))
    }
}

fn dispatch(
    item: LateItem,
    g: &Grammar,
    w: &Sentence,
    chart: &ConcurrentChart,
    tables: &ConcurrentTables,
    out: &mut Vec<LateItem>,
) {
    let mut insert = |child: LateItem| {
        if chart.insert(child) {
            out.push(child);
        }
    };
    match item.next_symbol(g) {
        None => {
            let lhs = g.rule(item.rule).lhs;
            let (i, k) = (item.origin, item.current);
            if !tables.atomic_complete_claim((lhs, i, k)) {
                return;
            }
            // Reply first, then read requests.
            tables.add_reply((lhs, i), k);
            let mut waiters = Vec::new();
            tables.requests_into((lhs, i), &mut waiters);
            for waiter in waiters {
                insert(waiter.advance_to(k));
            }
        }
        Some(n) if g.kind(n) == SymbolKind::Nonterminal => {
            let k = item.current;
            // Request first, then read replies.
            if tables.atomic_request_register((n, k), item) {
                for &rule in g.rules_for(n) {
                    insert(LateItem::new(rule, 0, k, k));
                }
            }
            let mut ends = Vec::new();
            tables.replies_into((n, k), &mut ends);
            for j in ends {
                insert(item.advance_to(j));
            }
        }
        Some(t) if g.kind(t) == SymbolKind::Epsilon => insert(item.advance_to(item.current)),
        Some(t) => {
            if w.get(item.current as usize) == Some(t) {
                insert(item.advance_to(item.current + 1));
            }
        }
    }
}

pub fn late_parse_parallel_outcome(
    g: &Grammar,
    w: &Sentence,
    cfg: &ParallelConfig,
) -> Result<ParallelOutcome, ParallelError> {
    ParallelLateParser::new(g, w, *cfg)?.run()
}

pub fn late_parse_parallel(
    g: &Grammar,
    w: &Sentence,
    cfg: &ParallelConfig,
) -> Result<GlobalChart, ParallelError> {
    Ok(late_parse_parallel_outcome(g, w, cfg)?.chart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_grammar, tokenize, RuleId};
    use crate::late::{late_parse, late_recognize};
    use std::sync::Barrier;

    #[test]
    fn zero_workers_rejected() {
        assert_eq!(ParallelConfig::with_workers(0), Err(ParallelError::NoWorkers));
    }

    #[test]
    fn runtime_visits_every_node_of_a_tree() {
        // Binary tree of depth 12 encoded as (depth, id).
        for workers in [1, 2, 4] {
            for policy in [QueuePolicy::Fifo, QueuePolicy::Lifo, QueuePolicy::Random(3)] {
                let cfg = ParallelConfig::new(workers, policy).unwrap();
                let seen = AtomicUsize::new(0);
                let n = run_to_quiescence(vec![0u32], &cfg, |depth, out| {
                    seen.fetch_add(1, Ordering::Relaxed);
                    if depth < 12 {
                        out.push(depth + 1);
                        out.push(depth + 1);
                    }
                })
                .unwrap();
                assert_eq!(n, (1 << 13) - 1);
                assert_eq!(seen.into_inner(), n);
            }
        }
    }

    #[test]
    fn runtime_reports_worker_panic() {
        let cfg = ParallelConfig::with_workers(3).unwrap();
        let err = run_to_quiescence(vec![0u32], &cfg, |depth, out| {
            if depth == 5 {
                panic!("boom at depth 5");
            }
            out.push(depth + 1);
        })
        .unwrap_err();
        assert_eq!(err, ParallelError::WorkerPanicked("boom at depth 5".into()));
    }

    #[test]
    fn racing_registration_has_one_winner() {
        let g = parse_grammar("START -> N\nN -> a").unwrap();
        let n = g.lookup("N").unwrap();
        for _ in 0..20 {
            let tables = ConcurrentTables::new();
            let barrier = Barrier::new(8);
            let winners = AtomicUsize::new(0);
            std::thread::scope(|s| {
                for t in 0..8u32 {
                    let (tables, barrier, winners) = (&tables, &barrier, &winners);
                    s.spawn(move || {
                        barrier.wait();
                        if tables.atomic_request_register((n, 0), LateItem::new(RuleId(0), 0, t, 0)) {
                            winners.fetch_add(1, Ordering::SeqCst);
                        }
                    });
                }
            });
            assert_eq!(winners.into_inner(), 1);
            assert_eq!(tables.request_count((n, 0)), 8);
        }
    }

    #[test]
    fn reregistration_is_noop() {
        let tables = ConcurrentTables::new();
        let key = (SymbolId(1), 0);
        let item = LateItem::new(RuleId(0), 0, 0, 0);
        assert!(tables.atomic_request_register(key, item));
        assert!(!tables.atomic_request_register(key, item));
        assert_eq!(tables.request_count(key), 1);
    }

    #[test]
    fn concurrent_distinct_registrations_all_land() {
        let tables = ConcurrentTables::new();
        let key = (SymbolId(1), 3);
        std::thread::scope(|s| {
            for t in 0..4u32 {
                let tables = &tables;
                s.spawn(move || {
                    for i in 0..250 {
                        tables.atomic_request_register(key, LateItem::new(RuleId(t), 0, i, 3));
                    }
                });
            }
        });
        assert_eq!(tables.request_count(key), 1000);
    }

    #[test]
    fn claims_are_exclusive() {
        let tables = ConcurrentTables::new();
        let wins = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for t in 0..10u32 {
                let (tables, wins) = (&tables, &wins);
                s.spawn(move || {
                    for i in 0..100u32 {
                        let triple = (SymbolId(1 + (i + t) % 100), 0, 0);
                        if tables.atomic_complete_claim(triple) {
                            wins.fetch_add(1, Ordering::SeqCst);
                        }
                    }
                });
            }
        });
        assert_eq!(wins.into_inner(), 100);
        assert!(!tables.atomic_complete_claim((SymbolId(1), 0, 0)));
    }

    #[test]
    fn matches_serial_on_small_grammars() {
        let cases = [
            ("START -> a", "a"),
            ("START -> START START | a", "a a a a"),
            ("START -> N N\nN -> EPSILON", ""),
            ("START -> A B | B\nA -> a | EPSILON\nB -> A b | b", "a b"),
        ];
        for (grammar, input) in cases {
            let g = parse_grammar(grammar).unwrap();
            let w = tokenize(input, &g).unwrap();
            let serial = late_parse(&g, &w);
            for workers in [1, 2, 4] {
                let cfg = ParallelConfig::new(workers, QueuePolicy::Random(workers as u64)).unwrap();
                let out = late_parse_parallel_outcome(&g, &w, &cfg).unwrap();
                assert_eq!(out.chart.items(), serial.items(), "{grammar} / {input}");
                assert_eq!(out.dispatches, out.chart.len());
                assert_eq!(
                    late_recognize(&out.chart, &g, &w),
                    late_recognize(&serial, &g, &w)
                );
            }
        }
    }
}
