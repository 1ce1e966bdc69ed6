use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmslab_bench::random_instance;
use mmslab_core::mms::MmsBudget;
use mmslab_core::protocols::{solve, HalfMode};
use mmslab_core::valuations::GeneratedClass;
use mmslab_core::DemandVector;
use std::hint::black_box;

fn dispatch(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let budget = MmsBudget::default();
    let routes: [&[usize]; 5] = [
        &[3, 2, 2],
        &[5, 2, 1],
        &[4, 3, 1],
        &[4, 2, 2],
        &[3, 3, 4, 4],
    ];
    for d in routes {
        let inst = random_instance(GeneratedClass::Xos, d.len(), 10, 11);
        let demand = DemandVector::new(d.to_vec()).unwrap();
        let name = d.iter().map(usize::to_string).collect::<Vec<_>>().join("");
        group.bench_with_input(BenchmarkId::new("xos_m10", name), &demand, |b, demand| {
            b.iter(|| solve(black_box(&inst), HalfMode::UniformHalf, demand, &budget).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dispatch);
criterion_main!(benches);
