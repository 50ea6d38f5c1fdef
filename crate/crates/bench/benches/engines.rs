use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use late_core::fixtures::{self, arith_expression};
use late_core::{
    replicate_nonterminals, tokenize, EarleyParser, LateParser, ParallelConfig, ParallelLateParser,
};

fn arith_engines(c: &mut Criterion) {
    let seed = fixtures::ARITH.grammar();
    let mut group = c.benchmark_group("arith");
    group.sample_size(10);
    for m in [1usize, 2, 4] {
        let g = replicate_nonterminals(&seed, m).unwrap();
        let w = tokenize(&arith_expression(11), &g).unwrap();
        group.bench_with_input(BenchmarkId::new("earley", m), &m, |b, _| {
            b.iter(|| EarleyParser::new(&g, &w).unwrap().run().len())
        });
        group.bench_with_input(BenchmarkId::new("late-serial", m), &m, |b, _| {
            b.iter(|| LateParser::new(&g, &w).run().chart.len())
        });
        for workers in [1usize, 2, 4] {
            let cfg = ParallelConfig::with_workers(workers).unwrap();
            group.bench_with_input(
                BenchmarkId::new(format!("late-parallel-{workers}"), m),
                &m,
                |b, _| {
                    b.iter(|| {
                        ParallelLateParser::new(&g, &w, cfg)
                            .unwrap()
                            .run()
                            .unwrap()
                            .chart
                            .len()
                    })
                },
            );
        }
    }
    group.finish();
}

fn minilang(c: &mut Criterion) {
    let g = fixtures::MINILANG.grammar();
    let line = "id = num ; while ( id ) { id = id - num * ( id + num ) ; print id ; }";
    let text = std::iter::repeat_n(line, 8).collect::<Vec<_>>().join(" ");
    let w = tokenize(&text, &g).unwrap();
    let mut group = c.benchmark_group("minilang");
    group.bench_function("earley", |b| {
        b.iter(|| EarleyParser::new(&g, &w).unwrap().run().len())
    });
    group.bench_function("late-serial", |b| {
        b.iter(|| LateParser::new(&g, &w).run().chart.len())
    });
    group.finish();
}

criterion_group!(benches, arith_engines, minilang);
criterion_main!(benches);
