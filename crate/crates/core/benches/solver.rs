use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lazymc::ordering::kcore;
use lazymc::{gen, lazy_mc, with_threads, CsrGraph, SolverConfig};

fn graphs() -> Vec<(&'static str, CsrGraph)> {
    vec![
        ("pa-20k-m8", gen::preferential_attachment(20_000, 8, 1)),
        ("gnp-2k-0.02", gen::gnp(2_000, 0.02, 2)),
        ("planted-5k-30", gen::planted_clique(5_000, 0.004, 30, 3)),
    ]
}

fn thread_counts() -> Vec<usize> {
    if cfg!(feature = "parallel") {
        vec![1, 0]
    } else {
        vec![1]
    }
}

fn label(threads: usize) -> &'static str {
    if threads == 1 {
        "sequential"
    } else {
        "parallel"
    }
}

fn bench_kcore(c: &mut Criterion) {
    let mut group = c.benchmark_group("kcore");
    for (name, g) in graphs() {
        for t in thread_counts() {
            group.bench_with_input(BenchmarkId::new(label(t), name), &g, |b, g| {
                b.iter(|| with_threads(t, |exec| kcore(g, 0, exec)))
            });
        }
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("lazy_mc");
    group.sample_size(10);
    for (name, g) in graphs() {
        for t in thread_counts() {
            let cfg = SolverConfig {
                threads: t,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(label(t), name), &g, |b, g| {
                b.iter(|| lazy_mc(g, &cfg).unwrap().omega)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_kcore, bench_solve);
criterion_main!(benches);
