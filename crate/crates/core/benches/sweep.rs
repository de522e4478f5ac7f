use criterion::{criterion_group, criterion_main, Criterion};

use cmass::harness::{build_expansion, run_convergence, Execution, ValidationOptions};
use cmass::model::Config;

fn sweep(c: &mut Criterion) {
    let mut cfg = Config::uniform_beam(-1.0, 0.8);
    cfg.n_max = 1;
    cfg.outer_grid = 120;
    cfg.inner_grid = 64;
    let art = build_expansion(&cfg).unwrap();

    let mut group = c.benchmark_group("oracle_sweep");
    group.sample_size(10);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let opts = ValidationOptions {
            execution,
            ..ValidationOptions::new(1, (11, 18))
        };
        group.bench_function(name, |b| b.iter(|| run_convergence(&art, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
