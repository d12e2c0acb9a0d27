use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussfit::bench::{run_bench_snr, BenchConfig, Execution, SnrGrid};
use gaussfit::erf::{build_erf_table, KGrid};
use gaussfit::signal::{sample_gaussian, GaussianParams, NoiseSpec};
use gaussfit::{run_method, MethodId, MethodSpec};

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("snr_sweep");
    group.sample_size(10);
    for execution in [Execution::Sequential, Execution::Parallel] {
        let config = BenchConfig {
            trials: 50,
            snr_grid: SnrGrid { start: -10.0, step: 5.0, stop: 20.0 },
            execution,
            ..Default::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{execution:?}")),
            &config,
            |b, config| b.iter(|| run_bench_snr(config).unwrap()),
        );
    }
    group.finish();
}

fn methods(c: &mut Criterion) {
    let table = build_erf_table(&KGrid::default()).unwrap();
    let truth = GaussianParams::new(1.0, 8.5, 1.15).unwrap();
    let signal = sample_gaussian(&truth, 0.01, 1001, Some(NoiseSpec { snr_db: 12.0, seed: 3 })).unwrap();
    let mut group = c.benchmark_group("fit");
    for id in MethodId::ALL {
        let spec = MethodSpec::new(id);
        group.bench_function(id.as_str(), |b| b.iter(|| run_method(&spec, &signal, &table)));
    }
    group.finish();
}

criterion_group!(benches, sweep, methods);
criterion_main!(benches);
