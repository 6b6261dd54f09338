use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use translocal_core::fluctuation::{iid_ensemble, synthesize_field, variance_vs_radius, VarianceOptions, Window};
use translocal_core::graph::{enumerate_max_cliques, renormalize, RenormConfig};
use translocal_core::madelung::{evolve, EvolveOptions, WaveFunction};
use translocal_core::oscillator::{InitialPhases, IntegrateOptions, OscillatorNetwork};
use translocal_core::Graph;

fn graphs(c: &mut Criterion) {
    let g = Graph::erdos_renyi(60, 0.3, 1).unwrap();
    c.bench_function("max_cliques_er60", |b| b.iter(|| enumerate_max_cliques(black_box(&g), 1)));
    let cycle = Graph::cycle(12);
    let cfg = RenormConfig::default();
    c.bench_function("renormalize_c12", |b| b.iter(|| renormalize(black_box(&cycle), &cfg).unwrap()));
}

fn oscillators(c: &mut Criterion) {
    let g = Graph::lattice_with_shortcuts(32, 2, 0.05, 1).unwrap();
    let net = OscillatorNetwork::seeded(g, 0.0, 0.3, 2.0, InitialPhases::Uniform, 1).unwrap();
    let opts = IntegrateOptions::new(0.05, 100);
    c.bench_function("rk4_1024_nodes_100_steps", |b| b.iter(|| net.integrate(black_box(&opts)).unwrap()));
}

fn fields(c: &mut Criterion) {
    c.bench_function("synthesize_256x256", |b| b.iter(|| synthesize_field(2, 256, 1.0, black_box(3)).unwrap()));
    let ens = iid_ensemble(2, 128, 0..20).unwrap();
    let opts = VarianceOptions {
        centers_per_field: 256,
        seed: 0,
    };
    c.bench_function("windowed_variance_128", |b| {
        b.iter(|| variance_vs_radius(black_box(&ens), Window::RaisedCosine, &[2.0, 4.0, 8.0, 16.0], &opts).unwrap())
    });
}

fn quantum(c: &mut Criterion) {
    let psi = WaveFunction::gaussian(1024, 0.05, 1.0, 0.0, 1.0, 1.0).unwrap();
    let v = vec![0.0; 1024];
    let opts = EvolveOptions::new(1e-3, 100).stride(100);
    c.bench_function("split_step_1024_100_steps", |b| {
        b.iter(|| evolve(black_box(&psi), &v, &opts).unwrap())
    });
}

criterion_group!(benches, graphs, oscillators, fields, quantum);
criterion_main!(benches);
