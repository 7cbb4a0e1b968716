use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tpsk_bench::ensembles;
use tpsk_core::spectrum::{gram_spectrum_oracle, spectrum, spectrum_uniform};
use tpsk_core::GeneralOverlaps;

fn bench(c: &mut Criterion) {
    let fixtures = ensembles();
    c.bench_function("spectrum/cubic", |b| {
        b.iter(|| {
            for e in &fixtures {
                black_box(spectrum(black_box(e)).unwrap());
            }
        })
    });
    c.bench_function("spectrum/gram_oracle", |b| {
        let overlaps: Vec<_> = fixtures
            .iter()
            .map(|e| (e.probs(), GeneralOverlaps::from_uniform(e.z(), e.theta()).unwrap()))
            .collect();
        b.iter(|| {
            for (p, ov) in &overlaps {
                black_box(gram_spectrum_oracle(black_box(p), ov).unwrap());
            }
        })
    });
    c.bench_function("spectrum/uniform_closed_form", |b| {
        b.iter(|| black_box(spectrum_uniform(black_box(0.6), black_box(0.4)).unwrap()))
    });
}

criterion_group!(benches, bench);
criterion_main!(benches);
