use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use splinter_bench::Inputs;
use splinter_core::caratheodory::correlations;
use splinter_core::fixtures::fixture;
use splinter_core::splinter::DEFAULT_COMPONENT_BUDGET;
use splinter_core::{Doubling, Dynamics, IntervalSet, IrrationalTag, KakutaniTower, Odometer, Rotation, Scalar};

fn scalars(c: &mut Criterion) {
    let tag = IrrationalTag::GoldenConjugate;
    let a = Scalar::parse("1/3+2*alpha", Some(tag)).unwrap();
    let b = Scalar::parse("21/13+1*alpha", Some(tag)).unwrap();
    c.bench_function("scalar/compare-golden", |bench| bench.iter(|| black_box(&a).try_cmp(black_box(&b)).unwrap()));
    c.bench_function("scalar/mod1-golden", |bench| bench.iter(|| black_box(&a).mod1().unwrap()));
}

fn set_algebra(c: &mut Criterion) {
    let inputs = Inputs::new(64);
    let mut g = c.benchmark_group("sets");
    for (name, sets) in [("dyadic", &inputs.dyadic), ("tailed", &inputs.tailed), ("golden", &inputs.golden)] {
        g.bench_function(BenchmarkId::new("union-pairs", name), |bench| {
            bench.iter(|| sets.windows(2).map(|w| w[0].union(&w[1]).unwrap().component_count()).sum::<usize>())
        });
        g.bench_function(BenchmarkId::new("measure", name), |bench| {
            bench.iter(|| sets.iter().map(|s| s.measure().unwrap()).collect::<Vec<_>>())
        });
    }
    g.finish();
}

fn preimages(c: &mut Criterion) {
    let inputs = Inputs::new(64);
    let golden = Rotation::golden();
    let mut g = c.benchmark_group("preimage");
    g.bench_function("rotation-golden", |b| b.iter(|| inputs.golden.iter().map(|s| golden.preimage(s).unwrap()).collect::<Vec<_>>()));
    g.bench_function("doubling", |b| b.iter(|| inputs.tailed.iter().map(|s| Doubling.preimage(s).unwrap()).collect::<Vec<_>>()));
    g.bench_function("odometer", |b| b.iter(|| inputs.tailed.iter().map(|s| Odometer.preimage(s).unwrap()).collect::<Vec<_>>()));
    g.bench_function("kakutani", |b| b.iter(|| inputs.tower.iter().map(|s| KakutaniTower.preimage(s).unwrap()).collect::<Vec<_>>()));
    g.finish();
}

fn splinter_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("splinter");
    g.sample_size(10);
    for name in ["doubling-half", "odometer-deep", "golden-quarter", "third-stall", "kakutani-cells"] {
        let f = fixture(name).unwrap();
        g.bench_function(name, |b| b.iter(|| f.run().unwrap().steps()));
    }
    g.finish();
}

fn correlation_traces(c: &mut Criterion) {
    let half: IntervalSet = "0..1/2".parse().unwrap();
    let mut g = c.benchmark_group("correlations");
    g.sample_size(10);
    g.bench_function("odometer-256", |b| {
        b.iter(|| correlations(&Odometer, &half, &half, 256, DEFAULT_COMPONENT_BUDGET).unwrap())
    });
    g.bench_function("doubling-12", |b| {
        b.iter(|| correlations(&Doubling, &half, &half, 12, DEFAULT_COMPONENT_BUDGET).unwrap())
    });
    g.finish();
}

criterion_group!(benches, scalars, set_algebra, preimages, splinter_runs, correlation_traces);
criterion_main!(benches);
