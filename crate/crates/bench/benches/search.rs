use criterion::{black_box, criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use lsnas::evo::Hyperparameters;
use lsnas::experiment::execute;
use lsnas::{hypervolume, Algorithm, Archive, ArchiveEntry, Genotype, Mode, RunSettings, SearchSpace};
use lsnas_bench::{front, macronas_table, random_genotypes, random_points};

fn canonicalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonicalize");
    for space in [SearchSpace::macronas(), SearchSpace::macronas_large()] {
        let genotypes = random_genotypes(&space, 1_000, 1);
        group.bench_function(BenchmarkId::from_parameter(space.len()), |b| {
            b.iter(|| {
                for g in &genotypes {
                    black_box(space.canonicalize(g));
                }
            })
        });
    }
    group.finish();
}

fn hypervolume_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("hypervolume");
    for n in [10, 100, 1_000] {
        let points = random_points(n, 2);
        group.bench_with_input(BenchmarkId::new("random", n), &points, |b, p| b.iter(|| hypervolume(black_box(p))));
        let f = front(n);
        group.bench_with_input(BenchmarkId::new("front", n), &f, |b, p| b.iter(|| hypervolume(black_box(p))));
    }
    group.finish();
}

fn archive_update(c: &mut Criterion) {
    let points = random_points(10_000, 3);
    c.bench_function("archive update 10k", |b| {
        b.iter_batched(
            Archive::new,
            |mut archive| {
                for (i, &v) in points.iter().enumerate() {
                    archive.update(ArchiveEntry {
                        key: Genotype(Vec::new()),
                        objectives: v,
                        acc_test: 0.0,
                        eval_index: i + 1,
                    });
                }
                archive
            },
            BatchSize::SmallInput,
        )
    });
}

fn local_search(c: &mut Criterion) {
    let table = macronas_table();
    let params = Hyperparameters::default();
    let mut group = c.benchmark_group("runs");
    group.sample_size(10);
    for alg in [Algorithm::Ls, Algorithm::Mogomea] {
        group.bench_function(BenchmarkId::new(alg.name(), 10_000), |b| {
            b.iter(|| execute(&table, alg, Mode::Multi, RunSettings::new(10_000), 7, &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, canonicalize, hypervolume_sweep, archive_update, local_search);
criterion_main!(benches);
