use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isrp_core::fit::{bootstrap_select, Candidate, Curve, FitProblem};
use isrp_core::isrp::{Baseline, ProfileOptions, Target};
use isrp_core::models::{ModelId, Parent, Variation};
use isrp_core::sim::{replicate_isrp, simulate, KoopmanCov, SimulationPlan};
use isrp_core::{Execution, Param, ParameterSet, TimeGrid};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn replication(c: &mut Criterion) {
    let mut plan = SimulationPlan::logistic_reference(1);
    plan.n = 200;
    plan.replications = 200;
    let mut opts = ProfileOptions::new(Parent::Logistic, Target::K);
    opts.baseline = Baseline::Known { value: 10.0, time: 0.0 };
    let mut group = c.benchmark_group("replicate_isrp");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| replicate_isrp(black_box(&plan), &opts, exec).unwrap())
        });
    }
    group.finish();
}

fn bootstrap(c: &mut Criterion) {
    let hump = ModelId::new(Parent::Exponential, Variation::HumpRate);
    let plan = SimulationPlan {
        model: hump,
        params: ParameterSet { r0: 0.1, b: 0.4, c: 1.0, x0: 230.0, ..Default::default() },
        grid: TimeGrid::new(0.0, 1.0, 11).unwrap(),
        n: 30,
        cov: KoopmanCov { sigma2: 0.001 * 230.0 * 230.0, rho: 0.1 },
        replications: 1,
        seed: 3,
    };
    let data = simulate(&plan).unwrap();
    let (t, y) = (data.times(), data.column_means());
    let ext = |c: f64| {
        FitProblem::new(Curve::Size(hump), t.clone(), y.clone(), ParameterSet { r0: 0.1, b: 0.5, c, x0: y[0], ..Default::default() })
            .unwrap()
            .fixing(Param::C)
    };
    let logistic = FitProblem::new(
        Curve::Size(ModelId::constant(Parent::Logistic)),
        t.clone(),
        y.clone(),
        ParameterSet::logistic(0.3, 450.0, y[0]),
    )
    .unwrap();
    let cands = vec![
        Candidate { name: "logistic".into(), problem: logistic },
        Candidate { name: "c1".into(), problem: ext(1.0) },
        Candidate { name: "c2".into(), problem: ext(2.0) },
    ];
    let mut group = c.benchmark_group("bootstrap_select");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| bootstrap_select(black_box(&data), &cands, 100, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replication, bootstrap);
criterion_main!(benches);
