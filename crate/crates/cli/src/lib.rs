//! Command-line front end.
//!
//! Exit codes: 0 success (or sentence recognized), 1 sentence not recognized
//! or a verification failure, 2 usage or input error, 3 engine rejection
//! (for example an ε-grammar given to the classic Earley engine).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use late_core::bench::{
    efficiency_vs_serial, find_weak_scaling_prefix, physical_cores, run_ambiguity_sweep, run_benchmark_suite,
    sweep_to_csv, BenchCase, Engine, SuiteSpec, TrialPolicy,
};
use late_core::fixtures::sentences_from_text;
use late_core::grammar::{replicate_nonterminals_capped, DEFAULT_REPLICATION_CAP};
use late_core::verify::{brute_force_recognize, DEFAULT_ORACLE_CAP};
use late_core::{
    canonicalize_earley, canonicalize_late, charts_equal, earley_recognize, late_recognize, parse_grammar,
    tokenize, wrap_wildcard, CanonicalChart, EarleyError, EarleyParser, Grammar, LateParser, ParallelConfig,
    ParallelLateParser, QueuePolicy, Sentence,
};

/// Environment variable that overrides every worker-count flag.
pub const WORKERS_ENV: &str = "LATE_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_RECOGNIZED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "late",
    version,
    about = "Earley and LATE context-free grammar recognizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print whether each sentence is in the grammar's language.
    Recognize(EngineArgs),
    /// Print the canonical chart dump.
    Chart(EngineArgs),
    /// Compare all engines (and the oracle) on every grammar in a directory.
    Verify(VerifyArgs),
    /// Time engines and write the benchmark CSV.
    Bench(BenchArgs),
    /// Time one engine on increasingly replicated grammars.
    Sweep(SweepArgs),
    /// Write a transformed grammar.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Write the sentence prefix whose chart size is closest to a target.
    WeakInput(WeakArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Grammar file.
    #[arg(short = 'g', long = "grammar")]
    grammar: PathBuf,
    /// Inline sentence (whitespace-separated tokens).
    #[arg(short = 's', long = "sentence")]
    sentence: Option<String>,
    /// Sentence file, one sentence per line.
    #[arg(short = 'S', long = "sentences")]
    sentence_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineName {
    Earley,
    Late,
    LateParallel,
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short = 'e', long = "engine", value_enum, default_value = "late")]
    engine: EngineName,
    /// Worker count for late-parallel.
    #[arg(short = 'w', long = "workers", default_value_t = 1)]
    workers: usize,
    /// fifo, lifo, random or random:<seed>.
    #[arg(long = "queue", visible_alias = "queue-policy", default_value = "fifo", value_parser = parse_policy)]
    queue: QueuePolicy,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Directory of `<name>.g` grammars with `<name>.sentences` files.
    dir: PathBuf,
    #[arg(long = "workers", value_delimiter = ',', default_value = "1,2,4,8")]
    workers: Vec<usize>,
    /// Parallel repetitions per worker count.
    #[arg(long = "reps", default_value_t = 3)]
    reps: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Grammar files; the file stem is the grammar id.
    #[arg(short = 'g', long = "grammar", required = true)]
    grammars: Vec<PathBuf>,
    #[arg(short = 's', long = "sentence")]
    sentence: Option<String>,
    #[arg(short = 'S', long = "sentences")]
    sentence_file: Option<PathBuf>,
    #[arg(
        long = "engines",
        value_enum,
        value_delimiter = ',',
        default_value = "earley,late,late-parallel"
    )]
    engines: Vec<EngineName>,
    /// Worker counts for late-parallel.
    #[arg(short = 'w', long = "workers", value_delimiter = ',', default_value = "1,2,4")]
    workers: Vec<usize>,
    /// Append parallel efficiency as a fraction of serial LATE efficiency.
    #[arg(long = "with-serial-efficiency")]
    with_serial_efficiency: bool,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(
        short = 'm',
        long = "replicas",
        value_delimiter = ',',
        default_value = "1,2,4,8"
    )]
    replicas: Vec<usize>,
    #[arg(short = 'e', long = "engine", value_enum, default_value = "late-parallel")]
    engine: EngineName,
    #[arg(short = 'w', long = "workers", default_value_t = 1)]
    workers: usize,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Replace each non-START nonterminal by M interchangeable copies.
    Replicate {
        #[arg(short = 'g', long = "grammar")]
        grammar: PathBuf,
        #[arg(short = 'm', long = "replicas")]
        replicas: usize,
        #[arg(long = "cap", default_value_t = DEFAULT_REPLICATION_CAP)]
        cap: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Allow any number of the grammar's terminals around a sentence.
    Wrap {
        #[arg(short = 'g', long = "grammar")]
        grammar: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct WeakArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Target number of chart items.
    #[arg(long = "target")]
    target: usize,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<QueuePolicy, String> {
    s.parse()
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Rejected(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type CmdResult = Result<i32, Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    workers_env: Option<String>,
}

impl Io<'_> {
    fn warn(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.err, "warning: {msg}");
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => self.out.write_all(text.as_bytes()).context("writing output")?,
        }
        Ok(())
    }

    fn worker_override(&self) -> Result<Option<usize>, Failure> {
        match self.workers_env.as_deref() {
            None | Some("") => Ok(None),
            Some(v) => {
                let n: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("{WORKERS_ENV}={v} is not a worker count"))?;
                if n == 0 {
                    return Err(anyhow!("{WORKERS_ENV} must be at least 1").into());
                }
                Ok(Some(n))
            }
        }
    }
}

/// Runs the CLI with explicit arguments and output streams. The worker
/// override is read from the process environment.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(WORKERS_ENV).ok(), out, err)
}

pub fn run_with_env<I, T>(
    args: I,
    workers_env: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Io {
        out,
        err,
        workers_env,
    };
    let result = match cli.command {
        Command::Recognize(a) => recognize(&mut io, a),
        Command::Chart(a) => chart(&mut io, a),
        Command::Verify(a) => verify(&mut io, a),
        Command::Bench(a) => bench(&mut io, a),
        Command::Sweep(a) => sweep(&mut io, a),
        Command::Gen(a) => gen(&mut io, a),
        Command::WeakInput(a) => weak_input(&mut io, a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(io.err, "error: {e:#}");
            EXIT_USAGE
        }
        Err(Failure::Rejected(e)) => {
            let _ = writeln!(io.err, "rejected: {e:#}");
            EXIT_REJECTED
        }
    }
}

fn load_grammar(path: &Path) -> Result<Grammar, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_grammar(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_sentences(
    io: &mut Io,
    g: &Grammar,
    inline: Option<&str>,
    file: Option<&Path>,
) -> Result<Vec<Sentence>, Failure> {
    match (inline, file) {
        (Some(text), file) => {
            if file.is_some() {
                io.warn("both -s and -S given; using the inline sentence");
            }
            Ok(vec![tokenize(text, g).context("tokenizing sentence")?])
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                out.push(tokenize(line, g).with_context(|| format!("{}:{}", path.display(), i + 1))?);
            }
            Ok(out)
        }
        (None, None) => Err(anyhow!("a sentence is required (-s TEXT or -S FILE)").into()),
    }
}

fn parallel_config(io: &Io, workers: usize, queue: QueuePolicy) -> Result<ParallelConfig, Failure> {
    let workers = io.worker_override()?.unwrap_or(workers);
    Ok(ParallelConfig::new(workers, queue).map_err(anyhow::Error::from)?)
}

fn rejected(e: EarleyError) -> Failure {
    Failure::Rejected(e.into())
}

/// Builds the chart with the selected engine; returns it with the recognition result.
fn run_engine(io: &Io, a: &EngineArgs, g: &Grammar, w: &Sentence) -> Result<(CanonicalChart, bool), Failure> {
    Ok(match a.engine {
        EngineName::Earley => {
            let chart = EarleyParser::new(g, w).map_err(rejected)?.run();
            (canonicalize_earley(&chart), earley_recognize(&chart, g, w))
        }
        EngineName::Late => {
            let chart = LateParser::with_policy(g, w, a.queue).run().chart;
            (canonicalize_late(&chart), late_recognize(&chart, g, w))
        }
        EngineName::LateParallel => {
            let cfg = parallel_config(io, a.workers, a.queue)?;
            let chart = ParallelLateParser::new(g, w, cfg)
                .and_then(|p| p.run())
                .map_err(anyhow::Error::from)?
                .chart;
            (canonicalize_late(&chart), late_recognize(&chart, g, w))
        }
    })
}

fn recognize(io: &mut Io, a: EngineArgs) -> CmdResult {
    let g = load_grammar(&a.input.grammar)?;
    let sentences = load_sentences(
        io,
        &g,
        a.input.sentence.as_deref(),
        a.input.sentence_file.as_deref(),
    )?;
    let mut all = true;
    for w in &sentences {
        let (_, ok) = run_engine(io, &a, &g, w)?;
        all &= ok;
        writeln!(io.out, "{ok}").context("writing output")?;
    }
    Ok(if all { EXIT_OK } else { EXIT_NOT_RECOGNIZED })
}

fn chart(io: &mut Io, a: EngineArgs) -> CmdResult {
    let g = load_grammar(&a.input.grammar)?;
    let sentences = load_sentences(
        io,
        &g,
        a.input.sentence.as_deref(),
        a.input.sentence_file.as_deref(),
    )?;
    let many = sentences.len() > 1;
    for (i, w) in sentences.iter().enumerate() {
        let (chart, _) = run_engine(io, &a, &g, w)?;
        if many {
            writeln!(io.out, "# sentence {i}").context("writing output")?;
        }
        io.out
            .write_all(chart.dump(&g).as_bytes())
            .context("writing output")?;
    }
    Ok(EXIT_OK)
}

fn verify(io: &mut Io, a: VerifyArgs) -> CmdResult {
    let mut workers = a.workers.clone();
    if let Some(n) = io.worker_override()? {
        workers = vec![n];
    }
    if workers.contains(&0) {
        return Err(anyhow!("worker counts must be at least 1").into());
    }
    let mut grammars: Vec<PathBuf> = fs::read_dir(&a.dir)
        .with_context(|| format!("reading {}", a.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "g"))
        .collect();
    grammars.sort();
    if grammars.is_empty() {
        return Err(anyhow!("no .g files in {}", a.dir.display()).into());
    }

    let mut failures = 0;
    for path in grammars {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let g = load_grammar(&path)?;
        let sentence_path = path.with_extension("sentences");
        let text = fs::read_to_string(&sentence_path).unwrap_or_default();
        for (i, w) in sentences_from_text(&text, &g).iter().enumerate() {
            let label = format!("{name}#{i}");
            let reference = canonicalize_late(&LateParser::new(&g, w).run().chart);
            let mut problems: Vec<String> = Vec::new();
            let compare = |what: String, other: &CanonicalChart, problems: &mut Vec<String>| {
                let (same, diff) = charts_equal(&reference, other);
                if !same {
                    problems.push(format!("{what} differs from late-serial:\n{}", diff.render(&g)));
                }
            };
            if !g.has_epsilon_rules() {
                let chart = EarleyParser::new(&g, w).map_err(rejected)?.run();
                compare("earley".into(), &canonicalize_earley(&chart), &mut problems);
            }
            for &p in &workers {
                for rep in 0..a.reps.max(1) {
                    let cfg = ParallelConfig::new(p, QueuePolicy::Random(rep as u64))
                        .map_err(anyhow::Error::from)?;
                    let chart = ParallelLateParser::new(&g, w, cfg)
                        .and_then(|p| p.run())
                        .map_err(anyhow::Error::from)?
                        .chart;
                    compare(
                        format!("late-parallel p={p} rep={rep}"),
                        &canonicalize_late(&chart),
                        &mut problems,
                    );
                }
            }
            if w.len() <= DEFAULT_ORACLE_CAP {
                let recognized = late_recognize(&LateParser::new(&g, w).run().chart, &g, w);
                if let Ok(expected) = brute_force_recognize(&g, w) {
                    if expected != recognized {
                        problems.push(format!("oracle says {expected}, late says {recognized}\n"));
                    }
                }
            }
            if problems.is_empty() {
                writeln!(io.out, "PASS {label}").context("writing output")?;
            } else {
                failures += 1;
                writeln!(io.out, "FAIL {label}").context("writing output")?;
                for p in problems {
                    io.out.write_all(p.as_bytes()).context("writing output")?;
                }
            }
        }
    }
    Ok(if failures == 0 {
        EXIT_OK
    } else {
        EXIT_NOT_RECOGNIZED
    })
}

fn bench(io: &mut Io, a: BenchArgs) -> CmdResult {
    let mut workers = a.workers.clone();
    if let Some(n) = io.worker_override()? {
        workers = vec![n];
    }
    let mut engines = Vec::new();
    for e in &a.engines {
        match e {
            EngineName::Earley => engines.push(Engine::Earley),
            EngineName::Late => engines.push(Engine::LateSerial),
            EngineName::LateParallel => {
                for &p in &workers {
                    engines.push(Engine::parallel(p).map_err(anyhow::Error::from)?);
                }
            }
        }
    }
    let mut cases = Vec::new();
    for path in &a.grammars {
        let g = load_grammar(path)?;
        let grammar_id = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let sentences = load_sentences(io, &g, a.sentence.as_deref(), a.sentence_file.as_deref())?;
        for (i, w) in sentences.into_iter().enumerate() {
            cases.push(BenchCase {
                grammar_id: grammar_id.clone(),
                grammar: g.clone(),
                sentence_id: format!("s{i}"),
                sentence: w,
            });
        }
    }
    let _ = writeln!(io.err, "host physical cores: {}", physical_cores());
    let report = run_benchmark_suite(&SuiteSpec {
        cases,
        engines,
        policy: TrialPolicy::default(),
    });
    for f in &report.failures {
        let _ = writeln!(
            io.err,
            "cell failed: {} p={} {} {}: {}",
            f.engine, f.workers, f.grammar_id, f.sentence_id, f.error
        );
    }
    let mut csv = report.to_csv();
    if a.with_serial_efficiency {
        let rel = efficiency_vs_serial(&report.rows);
        let mut lines: Vec<String> = csv.lines().map(str::to_string).collect();
        lines[0].push_str(",efficiency_fraction_of_serial");
        for (line, r) in lines.iter_mut().skip(1).zip(rel) {
            line.push(',');
            if let Some(r) = r {
                line.push_str(&r.to_string());
            }
        }
        csv = lines.join("\n") + "\n";
    }
    io.emit(a.output.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

fn sweep(io: &mut Io, a: SweepArgs) -> CmdResult {
    let g = load_grammar(&a.input.grammar)?;
    let sentences = load_sentences(
        io,
        &g,
        a.input.sentence.as_deref(),
        a.input.sentence_file.as_deref(),
    )?;
    let w = sentences
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("no sentence given"))?;
    let engine = match a.engine {
        EngineName::Earley => Engine::Earley,
        EngineName::Late => Engine::LateSerial,
        EngineName::LateParallel => Engine::LateParallel(parallel_config(io, a.workers, QueuePolicy::Fifo)?),
    };
    let rows =
        run_ambiguity_sweep(&g, &a.replicas, &w, &engine, &TrialPolicy::default()).map_err(|e| match e {
            late_core::bench::BenchError::Rejected(e) => rejected(e),
            other => Failure::Usage(other.into()),
        })?;
    io.emit(a.output.as_deref(), &sweep_to_csv(&rows))?;
    Ok(EXIT_OK)
}

fn gen(io: &mut Io, cmd: GenCommand) -> CmdResult {
    match cmd {
        GenCommand::Replicate {
            grammar,
            replicas,
            cap,
            output,
        } => {
            let g = load_grammar(&grammar)?;
            let r = replicate_nonterminals_capped(&g, replicas, cap).context("replicating grammar")?;
            io.emit(output.as_deref(), &r.to_string())?;
        }
        GenCommand::Wrap { grammar, output } => {
            let g = load_grammar(&grammar)?;
            io.emit(output.as_deref(), &wrap_wildcard(&g).to_string())?;
        }
    }
    Ok(EXIT_OK)
}

fn weak_input(io: &mut Io, a: WeakArgs) -> CmdResult {
    let g = load_grammar(&a.input.grammar)?;
    let sentences = load_sentences(
        io,
        &g,
        a.input.sentence.as_deref(),
        a.input.sentence_file.as_deref(),
    )?;
    let w = sentences
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("no sentence given"))?;
    let (prefix, found) = find_weak_scaling_prefix(&g, &w, a.target).context("searching for a prefix")?;
    let _ = writeln!(
        io.err,
        "prefix of {} tokens: {} items (target {}, residual {:+})",
        found.len,
        found.items,
        found.target,
        found.residual()
    );
    io.emit(a.output.as_deref(), &format!("{}\n", prefix.display(&g)))?;
    Ok(EXIT_OK)
}
