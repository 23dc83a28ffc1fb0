use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmemlab::bath::{correlation_function, tail_grid};
use qmemlab::davies::{build_classical_generator, kitaev_sector_gap, spectral_gap};
use qmemlab::dynamics::{class_rates_at, KmcEngine};
use qmemlab::errormap::{evolve_support, ChainModel, PauliAxis};
use qmemlab::lattice::{syndrome, Sector, SpinConfig, TorusLattice};
use qmemlab::memory::decode_matching;
use qmemlab_bench::{flat_bath, rates_for, ring, square, toric};

fn bath(c: &mut Criterion) {
    let model = flat_bath(1.0);
    let grid = tail_grid(10.0, 20.0, 200.0, 32);
    c.bench_function("correlation_flat_kms_tail", |b| b.iter(|| correlation_function(&model, black_box(&grid)).unwrap()));
}

fn davies(c: &mut Criterion) {
    let model = ring(10);
    let rates = rates_for(&model, 1.0);
    c.bench_function("generator_ring_10", |b| b.iter(|| build_classical_generator(&model, &rates).unwrap()));
    let gen = build_classical_generator(&model, &rates).unwrap();
    c.bench_function("gap_ring_10", |b| b.iter(|| spectral_gap(&gen, 2).unwrap()));
    let kitaev = toric(3);
    let krates = rates_for(&kitaev, 1.0);
    c.bench_function("kitaev_gap_l3", |b| b.iter(|| kitaev_sector_gap(&kitaev, &krates, 2).unwrap()));
}

fn kmc(c: &mut Criterion) {
    let model = square(16);
    let table = rates_for(&model, 0.6);
    let class_rates = class_rates_at(&model, &table, 0.6).unwrap();
    c.bench_function("kmc_square_16_1e5_events", |b| {
        b.iter_batched(
            || (KmcEngine::new(&model, class_rates.clone(), vec![1; model.n_sites()]), ChaCha8Rng::seed_from_u64(3)),
            |(mut engine, mut rng)| engine.run_events(100_000, &mut rng),
            BatchSize::SmallInput,
        )
    });
}

fn decoding(c: &mut Criterion) {
    let lattice = TorusLattice::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut spins = vec![1i8; lattice.n_edges()];
    for _ in 0..6 {
        let e = rng.random_range(0..spins.len());
        spins[e] = -spins[e];
    }
    let config = SpinConfig::from_values(spins).unwrap();
    let s = syndrome(&lattice, &config, Sector::Zlike).unwrap();
    c.bench_function("matching_l8_6_errors", |b| b.iter(|| decode_matching(black_box(&s), &lattice).unwrap()));
}

fn errormap(c: &mut Criterion) {
    let chain = ChainModel::new(8, 1.0, 1.0).unwrap();
    c.bench_function("support_chain_8", |b| b.iter(|| evolve_support(&chain, 0, PauliAxis::Z, &[1.5]).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bath, davies, kmc, decoding, errormap
}
criterion_main!(benches);
