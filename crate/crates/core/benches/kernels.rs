use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use floquet_tfim::evolution::{evolve, one_period_propagator};
use floquet_tfim::floquet::magnus;
use floquet_tfim::kernel::CompiledHamiltonian;
use floquet_tfim::model::{assemble_hamiltonian, presets};
use floquet_tfim::{par, C64};

// Every benchmark runs twice: on the rayon pool and with par::sequential
// forcing the plain-iterator path.
fn modes() -> [(&'static str, bool); 2] {
    [("parallel", true), ("sequential", false)]
}

fn run<R>(parallel: bool, f: impl FnOnce() -> R) -> R {
    if parallel {
        f()
    } else {
        par::sequential(f)
    }
}

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for sites in [12, 16] {
        let terms = assemble_hamiltonian(&presets::edge_driven(sites, 0.1, 4.0, 2.0).unwrap()).unwrap();
        let h = CompiledHamiltonian::new(&terms);
        let snapshot = h.snapshot(0.3);
        let dim = 1usize << sites;
        let x: Vec<C64> = (0..dim).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let mut y = vec![C64::new(0.0, 0.0); dim];
        for (mode, parallel) in modes() {
            group.bench_with_input(BenchmarkId::new(mode, sites), &sites, |b, _| {
                b.iter(|| run(parallel, || h.apply_into(&snapshot, 0.0, black_box(&x), &mut y)))
            });
        }
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve_20_steps");
    group.sample_size(10);
    let config = presets::edge_driven(14, 0.1, 4.0, 2.0).unwrap();
    let dt = 5e-3 * PI;
    for (mode, parallel) in modes() {
        group.bench_function(mode, |b| b.iter(|| run(parallel, || evolve(&config, dt, 20.0 * dt, 20).unwrap())));
    }
    group.finish();
}

fn propagator(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_period_propagator");
    group.sample_size(10);
    let config = presets::mid_bond_switch(6, 0.1, 2.0).unwrap();
    for (mode, parallel) in modes() {
        group.bench_function(mode, |b| {
            b.iter(|| run(parallel, || one_period_propagator(&config, PI, PI / 2000.0).unwrap()))
        });
    }
    group.finish();
}

fn magnus_terms(c: &mut Criterion) {
    let mut group = c.benchmark_group("magnus_L6");
    group.sample_size(10);
    let config = presets::mid_bond_switch(6, 0.1, 2.0).unwrap();
    for (mode, parallel) in modes() {
        group.bench_function(mode, |b| b.iter(|| run(parallel, || magnus(&config, PI, 1024).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, matvec, evolution, propagator, magnus_terms);
criterion_main!(benches);
