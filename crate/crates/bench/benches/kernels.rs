use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gmtrj_core::latent::{run_latent, LcAlgorithm, LcConfig, LcJump, LcModel};
use gmtrj_core::logistic::{Embedding, LogisticJump, LogisticModel};
use gmtrj_core::samplers::{ManifestWeights, MtmInv, QuadWeights};
use gmtrj_core::{gmtrj_step, rj_step, ChainState, DestinationPolicy, ModelIndex, MoveSpec, RngStream, TargetDensity};

fn logistic_start(model: &LogisticModel) -> (ChainState, f64) {
    let m = ModelIndex(3);
    let x = ChainState::new(m, model.mode(m));
    let lx = model.log_target(&x);
    (x, lx)
}

fn logistic(c: &mut Criterion) {
    let model = LogisticModel::bundled();
    let jump = LogisticJump::new(&model, 0.5, Embedding::default()).unwrap();
    let (x, lx) = logistic_start(&model);
    let mut g = c.benchmark_group("logistic");
    g.bench_function("rj_step", |b| {
        let mut rng = RngStream::new(1, 0).rng();
        b.iter(|| black_box(rj_step(&mut rng, &x, lx, &jump, &model)))
    });
    for k in [10, 50] {
        let spec = MoveSpec::new(k, DestinationPolicy::Same).unwrap();
        g.bench_with_input(BenchmarkId::new("gmtrj_step/mtm-inv", k), &spec, |b, spec| {
            let mut rng = RngStream::new(1, 0).rng();
            b.iter(|| black_box(gmtrj_step(&mut rng, &x, lx, spec, &jump, &MtmInv, &model)))
        });
        let quad = QuadWeights::new(&model);
        g.bench_with_input(BenchmarkId::new("gmtrj_step/quad", k), &spec, |b, spec| {
            let mut rng = RngStream::new(1, 0).rng();
            b.iter(|| black_box(gmtrj_step(&mut rng, &x, lx, spec, &jump, &quad, &model)))
        });
    }
    g.finish();
}

fn latent(c: &mut Criterion) {
    let model = LcModel::bundled();
    let jump = LcJump::new(&model, 2.0, 2.0, 10.0).unwrap();
    let mut cfg = LcConfig::new(LcAlgorithm::Rj, 1);
    cfg.sweeps = 2_000;
    cfg.burn_in = 0;
    let x = run_latent(&model, &cfg, "bench").unwrap().final_state;
    let lx = model.log_target(&x);
    let mut g = c.benchmark_group("latent");
    g.bench_function("gibbs_sweep", |b| {
        let mut rng = RngStream::new(2, 0).rng();
        b.iter(|| black_box(model.gibbs_sweep(&mut rng, &x)))
    });
    g.bench_function("rj_step", |b| {
        let mut rng = RngStream::new(2, 0).rng();
        b.iter(|| black_box(rj_step(&mut rng, &x, lx, &jump, &model)))
    });
    let spec = MoveSpec::new(10, DestinationPolicy::Same).unwrap();
    g.bench_function("gmtrj_step/mtm-inv/10", |b| {
        let mut rng = RngStream::new(2, 0).rng();
        b.iter(|| black_box(gmtrj_step(&mut rng, &x, lx, &spec, &jump, &MtmInv, &model)))
    });
    let man = ManifestWeights::new(&model);
    g.bench_function("gmtrj_step/man/10", |b| {
        let mut rng = RngStream::new(2, 0).rng();
        b.iter(|| black_box(gmtrj_step(&mut rng, &x, lx, &spec, &jump, &man, &model)))
    });
    g.finish();
}

criterion_group!(benches, logistic, latent);
criterion_main!(benches);
