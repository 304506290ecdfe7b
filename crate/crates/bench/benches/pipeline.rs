use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use reactmotion::train::{
    afd_all, nn_baseline_batch, pipeline_grad_check, synthesize_all, train_gan,
};
use reactmotion::{Discriminator, Generator, Motion, TrainConfig};
use reactmotion_bench::{clips, small_config};

fn synthesis(c: &mut Criterion) {
    let data = clips(4, 40);
    let small = Generator::new(small_config(1).generator_config(), 0).unwrap();
    c.bench_function("synthesize 8 clips, h_part 8", |b| {
        b.iter(|| synthesize_all(black_box(&small), black_box(&data)).unwrap())
    });
    let full = Generator::new(TrainConfig::sbu().generator_config(), 0).unwrap();
    c.bench_function("synthesize 1 clip, default widths", |b| {
        b.iter(|| full.synthesize(black_box(&data[0].motion_a)).unwrap())
    });
    let disc = Discriminator::new(small_config(1).discriminator_config(), 0).unwrap();
    let bs: Vec<&Motion> = data.iter().map(|c| &c.motion_b).collect();
    c.bench_function("discriminate 8 clips, h_disc 16", |b| {
        b.iter(|| disc.classify_batch(black_box(&bs)).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let data = clips(4, 20);
    let config = small_config(1);
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    group.bench_function("one epoch, 8 clips", |b| {
        b.iter(|| train_gan(black_box(&data), &config).unwrap())
    });
    group.bench_function("pipeline gradient check, 200 entries", |b| {
        b.iter(|| pipeline_grad_check(black_box(1), Some(200)).unwrap())
    });
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let train = clips(16, 40);
    let test = clips(4, 40);
    let queries: Vec<&Motion> = test.iter().map(|c| &c.motion_a).collect();
    c.bench_function("nn baseline, 8 queries over 32 clips", |b| {
        b.iter(|| nn_baseline_batch(black_box(&train), black_box(&queries)).unwrap())
    });
    let preds: Vec<Motion> = test.iter().map(|c| c.motion_b.clone()).collect();
    c.bench_function("afd, 8 clips", |b| {
        b.iter(|| afd_all(black_box(&preds), black_box(&test), false).unwrap())
    });
}

criterion_group!(benches, synthesis, training, evaluation);
criterion_main!(benches);
