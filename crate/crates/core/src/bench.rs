//! Runtime measurement, speedup and efficiency, weak-scaling input
//! construction, and the ambiguity sweep.
//!
//! Timing brackets chart construction only: parsers are allocated and
//! seeded before the clock starts and the chart is dropped after it stops.
//! Each measurement repeats until it has 100 trials or one second of total
//! time, whichever comes first, after up to three untimed warm-up runs.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::earley::{EarleyError, EarleyParser};
use crate::grammar::{replicate_nonterminals, Grammar, GrammarError, Sentence};
use crate::late::{LateParser, QueuePolicy};
use crate::parallel::{ParallelConfig, ParallelError, ParallelLateParser};

pub const CSV_HEADER: &str = "engine,workers,grammar_id,sentence_id,trials,total_s,mean_s,chart_items,speedup_vs_earley,speedup_vs_late_serial,efficiency_items_per_s_per_p";
pub const SWEEP_CSV_HEADER: &str =
    "replicas,engine,workers,grammar_rules,trials,total_s,mean_s,chart_items,items_per_s";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Rejected(#[from] EarleyError),
    #[error(transparent)]
    Parallel(#[from] ParallelError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("target of {target} items is unreachable: the full sentence has {available}")]
    TargetUnreachable { target: usize, available: usize },
    #[error("chart size is not monotone in prefix length: {shorter} tokens give {shorter_items} items, {longer} tokens give {longer_items}")]
    NotMonotone {
        shorter: usize,
        shorter_items: usize,
        longer: usize,
        longer_items: usize,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, MetricError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(MetricError::NonPositive { name, value })
    }
}

/// Speedup of A over B: `t_b / t_a`.
pub fn compute_speedup(t_a: f64, t_b: f64) -> Result<f64, MetricError> {
    Ok(positive("t_b", t_b)? / positive("t_a", t_a)?)
}

/// Items per second per processor: `n / (p * t)`.
pub fn compute_efficiency(items: usize, processors: usize, seconds: f64) -> Result<f64, MetricError> {
    let n = positive("items", items as f64)?;
    let p = positive("processors", processors as f64)?;
    Ok(n / (p * positive("seconds", seconds)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Earley,
    LateSerial,
    LateParallel(ParallelConfig),
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Earley => "earley",
            Engine::LateSerial => "late-serial",
            Engine::LateParallel(_) => "late-parallel",
        }
    }

    pub fn workers(&self) -> usize {
        match self {
            Engine::LateParallel(cfg) => cfg.workers,
            _ => 1,
        }
    }

    pub fn parallel(workers: usize) -> Result<Engine, ParallelError> {
        Ok(Engine::LateParallel(ParallelConfig::new(
            workers,
            QueuePolicy::Fifo,
        )?))
    }

    /// Builds the chart once, untimed, and returns its item count.
    pub fn chart_items(&self, g: &Grammar, w: &Sentence) -> Result<usize, BenchError> {
        Ok(match self {
            Engine::Earley => EarleyParser::new(g, w)?.run().len(),
            Engine::LateSerial => LateParser::new(g, w).run().chart.len(),
            Engine::LateParallel(cfg) => ParallelLateParser::new(g, w, *cfg)?.run()?.chart.len(),
        })
    }

    /// One timed chart construction.
    fn time_once(&self, g: &Grammar, w: &Sentence) -> Result<Duration, BenchError> {
        Ok(match self {
            Engine::Earley => {
                let parser = EarleyParser::new(g, w)?;
                let t0 = Instant::now();
                let chart = parser.run();
                let dt = t0.elapsed();
                drop(chart);
                dt
            }
            Engine::LateSerial => {
                let parser = LateParser::new(g, w);
                let t0 = Instant::now();
                let out = parser.run();
                let dt = t0.elapsed();
                drop(out);
                dt
            }
            Engine::LateParallel(cfg) => {
                let mut parser = ParallelLateParser::new(g, w, *cfg)?;
                let t0 = Instant::now();
                parser.build()?;
                let dt = t0.elapsed();
                drop(parser);
                dt
            }
        })
    }
}

/// When to stop repeating a measurement.
#[derive(Clone, Copy, Debug)]
pub struct TrialPolicy {
    pub warmup: usize,
    pub min_trials: usize,
    pub min_total: Duration,
}

impl Default for TrialPolicy {
    fn default() -> Self {
        TrialPolicy {
            warmup: 3,
            min_trials: 100,
            min_total: Duration::from_secs(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub engine: &'static str,
    pub workers: usize,
    pub grammar_id: String,
    pub sentence_id: String,
    pub trials: usize,
    pub total_time: f64,
    pub mean_time: f64,
    pub chart_items: usize,
}

impl BenchResult {
    pub fn satisfies(&self, policy: &TrialPolicy) -> bool {
        self.trials >= policy.min_trials || self.total_time >= policy.min_total.as_secs_f64()
    }
}

pub fn measure_runtime(
    engine: &Engine,
    g: &Grammar,
    w: &Sentence,
    policy: &TrialPolicy,
) -> Result<BenchResult, BenchError> {
    // The item-count run doubles as the first warm-up. Warm-up stops early
    // once it has used the measurement budget on its own.
    let t0 = Instant::now();
    let chart_items = engine.chart_items(g, w)?;
    let mut warm = t0.elapsed();
    for _ in 1..policy.warmup {
        if warm >= policy.min_total {
            break;
        }
        warm += engine.time_once(g, w)?;
    }
    let mut trials = 0;
    let mut total = Duration::ZERO;
    while trials < policy.min_trials && total < policy.min_total {
        total += engine.time_once(g, w)?;
        trials += 1;
    }
    let total_time = total.as_secs_f64();
    Ok(BenchResult {
        engine: engine.name(),
        workers: engine.workers(),
        grammar_id: String::new(),
        sentence_id: String::new(),
        trials,
        total_time,
        mean_time: total_time / trials as f64,
        chart_items,
    })
}

/// Number of physical cores, read from `/proc/cpuinfo` where available and
/// falling back to the logical CPU count.
pub fn physical_cores() -> usize {
    let logical = std::thread::available_parallelism().map_or(1, |n| n.get());
    let Ok(info) = std::fs::read_to_string("/proc/cpuinfo") else {
        return logical;
    };
    let mut cores = std::collections::HashSet::new();
    let mut physical = None;
    for line in info.lines() {
        let mut parts = line.splitn(2, ':');
        let key = parts.next().unwrap_or("").trim();
        let value = parts.next().unwrap_or("").trim();
        match key {
            "physical id" => physical = Some(value.to_string()),
            "core id" => {
                cores.insert((physical.clone(), value.to_string()));
            }
            _ => {}
        }
    }
    if cores.is_empty() {
        logical
    } else {
        cores.len().min(logical)
    }
}

/// Prefix found for a weak-scaling target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeakPrefix {
    pub len: usize,
    pub items: usize,
    pub target: usize,
}

impl WeakPrefix {
    /// Signed distance from the target.
    pub fn residual(&self) -> i64 {
        self.items as i64 - self.target as i64
    }
}

/// Binary search over prefix lengths `0..=max_len` for the prefix whose item
/// count (as reported by `count`) is closest to `target`; ties go to the
/// shorter prefix. Every probe is checked against the others for
/// monotonicity.
pub fn search_prefix<F>(max_len: usize, target: usize, mut count: F) -> Result<WeakPrefix, BenchError>
where
    F: FnMut(usize) -> Result<usize, BenchError>,
{
    let mut probes: Vec<(usize, usize)> = Vec::new();
    let mut probe = |len: usize, probes: &mut Vec<(usize, usize)>| -> Result<usize, BenchError> {
        if let Some(&(_, items)) = probes.iter().find(|(l, _)| *l == len) {
            return Ok(items);
        }
        let items = count(len)?;
        for &(l, i) in probes.iter() {
            let bad = (l < len && i > items) || (l > len && i < items);
            if bad {
                let ((shorter, shorter_items), (longer, longer_items)) = if l < len {
                    ((l, i), (len, items))
                } else {
                    ((len, items), (l, i))
                };
                return Err(BenchError::NotMonotone {
                    shorter,
                    shorter_items,
                    longer,
                    longer_items,
                });
            }
        }
        probes.push((len, items));
        Ok(items)
    };

    let full = probe(max_len, &mut probes)?;
    if full < target {
        return Err(BenchError::TargetUnreachable {
            target,
            available: full,
        });
    }
    // Smallest length whose count reaches the target.
    let (mut lo, mut hi) = (0usize, max_len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut probes)? >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let at = probe(lo, &mut probes)?;
    let mut best = WeakPrefix {
        len: lo,
        items: at,
        target,
    };
    if lo > 0 {
        let below = probe(lo - 1, &mut probes)?;
        if target - below <= at - target {
            best = WeakPrefix {
                len: lo - 1,
                items: below,
                target,
            };
        }
    }
    // A plateau of equal counts resolves to its shortest prefix.
    while best.len > 0 && probe(best.len - 1, &mut probes)? == best.items {
        best.len -= 1;
    }
    Ok(best)
}

/// Chart item count of a prefix. Uses serial LATE, whose chart equals the
/// classic Earley chart on ε-free grammars and is also defined with ε-rules.
pub fn prefix_chart_items(g: &Grammar, w: &Sentence, len: usize) -> usize {
    let prefix = w.prefix(len);
    LateParser::new(g, &prefix).run().chart.len()
}

pub fn find_weak_scaling_prefix(
    g: &Grammar,
    w: &Sentence,
    target_items: usize,
) -> Result<(Sentence, WeakPrefix), BenchError> {
    let found = search_prefix(w.len(), target_items, |len| Ok(prefix_chart_items(g, w, len)))?;
    Ok((w.prefix(found.len), found))
}

/// One benchmark input.
#[derive(Clone, Debug)]
pub struct BenchCase {
    pub grammar_id: String,
    pub grammar: Grammar,
    pub sentence_id: String,
    pub sentence: Sentence,
}

#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub cases: Vec<BenchCase>,
    pub engines: Vec<Engine>,
    pub policy: TrialPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub result: BenchResult,
    pub speedup_vs_earley: Option<f64>,
    pub speedup_vs_late_serial: Option<f64>,
    pub efficiency: f64,
}

#[derive(Debug)]
pub struct CellFailure {
    pub engine: &'static str,
    pub workers: usize,
    pub grammar_id: String,
    pub sentence_id: String,
    pub error: BenchError,
}

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub failures: Vec<CellFailure>,
}

impl SuiteReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let r = &row.result;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.engine,
                r.workers,
                r.grammar_id,
                r.sentence_id,
                r.trials,
                r.total_time,
                r.mean_time,
                r.chart_items,
                opt(row.speedup_vs_earley),
                opt(row.speedup_vs_late_serial),
                row.efficiency
            );
        }
        out
    }
}

/// Measures every (engine, case) cell. Speedups are relative to the serial
/// Earley and serial LATE rows of the same case; efficiency uses the row's
/// worker count as `p`. Cells that fail are recorded and skipped.
pub fn run_benchmark_suite(spec: &SuiteSpec) -> SuiteReport {
    let mut report = SuiteReport::default();
    for case in &spec.cases {
        let first_row = report.rows.len();
        for engine in &spec.engines {
            match measure_runtime(engine, &case.grammar, &case.sentence, &spec.policy) {
                Ok(mut result) => {
                    result.grammar_id = case.grammar_id.clone();
                    result.sentence_id = case.sentence_id.clone();
                    let efficiency = compute_efficiency(result.chart_items, result.workers, result.mean_time)
                        .unwrap_or(0.0);
                    report.rows.push(SuiteRow {
                        result,
                        speedup_vs_earley: None,
                        speedup_vs_late_serial: None,
                        efficiency,
                    });
                }
                Err(error) => report.failures.push(CellFailure {
                    engine: engine.name(),
                    workers: engine.workers(),
                    grammar_id: case.grammar_id.clone(),
                    sentence_id: case.sentence_id.clone(),
                    error,
                }),
            }
        }
        let rows = &mut report.rows[first_row..];
        let baseline = |name: &str, rows: &[SuiteRow]| {
            rows.iter()
                .find(|r| r.result.engine == name)
                .map(|r| r.result.mean_time)
        };
        let earley = baseline("earley", rows);
        let late = baseline("late-serial", rows);
        for row in rows.iter_mut() {
            let t = row.result.mean_time;
            row.speedup_vs_earley = earley.and_then(|b| compute_speedup(t, b).ok());
            row.speedup_vs_late_serial = late.and_then(|b| compute_speedup(t, b).ok());
        }
    }
    report
}

/// Parallel efficiency as a fraction of the serial LATE efficiency measured
/// on the same case, for every parallel row that has a serial partner.
pub fn efficiency_vs_serial(rows: &[SuiteRow]) -> Vec<Option<f64>> {
    rows.iter()
        .map(|row| {
            let serial = rows.iter().find(|r| {
                r.result.engine == "late-serial"
                    && r.result.grammar_id == row.result.grammar_id
                    && r.result.sentence_id == row.result.sentence_id
            })?;
            (serial.efficiency > 0.0).then(|| row.efficiency / serial.efficiency)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub replicas: usize,
    pub grammar_rules: usize,
    pub result: BenchResult,
    pub items_per_s: f64,
}

/// Replicates the seed grammar for each `m` and measures one engine on a
/// fixed sentence.
pub fn run_ambiguity_sweep(
    seed: &Grammar,
    replicas: &[usize],
    w: &Sentence,
    engine: &Engine,
    policy: &TrialPolicy,
) -> Result<Vec<SweepRow>, BenchError> {
    let mut rows = Vec::with_capacity(replicas.len());
    for &m in replicas {
        let g = replicate_nonterminals(seed, m)?;
        // Token ids differ between grammars; map through names.
        let tokens = w
            .tokens()
            .iter()
            .map(|&t| g.lookup(seed.name(t)).expect("replication keeps terminals"))
            .collect();
        let sentence = Sentence::new(tokens);
        let mut result = measure_runtime(engine, &g, &sentence, policy)?;
        result.grammar_id = format!("m{m}");
        let items_per_s = result.chart_items as f64 / result.mean_time;
        rows.push(SweepRow {
            replicas: m,
            grammar_rules: g.rules().len(),
            result,
            items_per_s,
        });
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let r = &row.result;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.replicas,
            r.engine,
            r.workers,
            row.grammar_rules,
            r.trials,
            r.total_time,
            r.mean_time,
            r.chart_items,
            row.items_per_s
        );
    }
    out
}
