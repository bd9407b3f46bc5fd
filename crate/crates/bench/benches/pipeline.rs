use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qjump_core::estimate::{fit_fringe, fit_populations, FringeHint};
use qjump_core::experiment::{default_fringe_detector, default_image_detector, simulate_sample, ExperimentSetup};
use qjump_core::optics::{
    frame_sequence, itop, render_frame, DetectorSpec, FringeField, ImageField, ModeGeometry, ProfileAxis,
};
use qjump_core::*;

fn cascade_quarter() -> (KrausSet, InitialState, DensityMatrix) {
    let k = build_kraus(DecayType::Cascade, JumpProbabilities::new(0.25, 0.0, 0.25).unwrap()).unwrap();
    let s = InitialState::equal();
    let rho = apply_channel(&k, &pure_density(&s)).unwrap();
    (k, s, rho)
}

fn channel(c: &mut Criterion) {
    let (k, s, _) = cascade_quarter();
    let rho = pure_density(&s);
    c.bench_function("apply_channel", |b| b.iter(|| apply_channel(black_box(&k), black_box(&rho)).unwrap()));
    let p = JumpProbabilities::new(0.25, 0.0, 0.25).unwrap();
    c.bench_function("closed_form_evolve", |b| {
        b.iter(|| closed_form_evolve(DecayType::Cascade, black_box(p), black_box(&s)).unwrap())
    });
}

fn optics(c: &mut Criterion) {
    let g = ModeGeometry::default();
    let (k, s, rho) = cascade_quarter();
    let spec = DetectorSpec { mean_photons: 1e5, seed: 1, ..default_image_detector(&g) };
    c.bench_function("render_frame/image", |b| {
        b.iter(|| render_frame(&ImageField::new(&rho, g), black_box(&spec)).unwrap())
    });
    c.bench_function("frame_sequence/cascade", |b| b.iter(|| frame_sequence(&k, &s, &g, black_box(&spec)).unwrap()));
}

fn estimation(c: &mut Criterion) {
    let g = ModeGeometry::default();
    let (_, s, rho) = cascade_quarter();
    let image_spec = DetectorSpec { mean_photons: 1e5, seed: 2, ..default_image_detector(&g) };
    let image = itop(&render_frame(&ImageField::new(&rho, g), &image_spec).unwrap(), ProfileAxis::Rows).profile;
    c.bench_function("fit_populations", |b| b.iter(|| fit_populations(black_box(&image), Some(&g)).unwrap()));

    let sub = project_subspace(&rho, 1, 2).unwrap();
    let fringe_spec = DetectorSpec { mean_photons: 1e5, seed: 3, ..default_fringe_detector(&g) };
    let fringe = itop(&render_frame(&FringeField { sub, geom: g }, &fringe_spec).unwrap(), ProfileAxis::Rows).profile;
    let hint = FringeHint::new(&g, (1, 2));
    c.bench_function("fit_fringe", |b| b.iter(|| fit_fringe(black_box(&fringe), Some(&hint)).unwrap()));

    let setup = ExperimentSetup::new(g, 1e5, 64, 9, false);
    let p = JumpProbabilities::new(0.25, 0.0, 0.25).unwrap();
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("simulate_sample/64", |b| {
        b.iter(|| simulate_sample(DecayType::Cascade, p, &s, &setup, 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, channel, optics, estimation);
criterion_main!(benches);
