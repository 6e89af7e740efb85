use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use cyclic_dce::dynamics::{default_step, EffectiveSystem, LindbladPropagator, SchrodingerPropagator};
use cyclic_dce::presets;
use cyclic_dce::{
    bare_hamiltonian, diagonalize, zeta_branch, DensityOperator, EffectiveState, HilbertSpace, QuantumState,
    TimeGrid,
};

fn spectrum(c: &mut Criterion) {
    let p = presets::fig1();
    let mut group = c.benchmark_group("spectrum");
    for n_max in [10, 30] {
        let space = HilbertSpace::new(n_max).unwrap();
        let h0 = bare_hamiltonian(&p.params, space).unwrap();
        group.bench_function(format!("diagonalize/n_max={n_max}"), |b| b.iter(|| diagonalize(black_box(&h0)).unwrap()));
    }
    let space = HilbertSpace::new(30).unwrap();
    let spec = diagonalize(&bare_hamiltonian(&p.params, space).unwrap()).unwrap();
    group.bench_function("zeta_branch/k=20", |b| b.iter(|| zeta_branch(black_box(&spec), space, 20).unwrap()));
    group.finish();
}

fn schrodinger(c: &mut Criterion) {
    let p = presets::fig1();
    let space = HilbertSpace::new(p.n_max).unwrap();
    let prop = SchrodingerPropagator::new(&p.params, &p.drive, space).unwrap();
    let psi0 = QuantumState::basis(space, 0, 0);
    let dt = default_step(prop.max_frequency());
    c.bench_function("schrodinger/1000 steps", |b| {
        b.iter(|| prop.propagate(black_box(&psi0), 0.0, 1000.0 * dt, 1000).unwrap())
    });
}

fn effective(c: &mut Criterion) {
    let p = presets::fig1();
    let space = HilbertSpace::new(p.n_max).unwrap();
    let spec = diagonalize(&bare_hamiltonian(&p.params, space).unwrap()).unwrap();
    let system = EffectiveSystem::new(&spec, space, &p.drive, 0.1).unwrap();
    let b0 = EffectiveState::dressed(spec.dim(), zeta_branch(&spec, space, 0).unwrap().index(0)).unwrap();
    let dt = default_step(system.max_frequency());
    let grid = TimeGrid::new(0.0, 1000.0 * dt, dt, 1000).unwrap();
    c.bench_function("effective/1000 steps", |b| b.iter(|| system.run(black_box(&b0), &grid, |_, _| {}).unwrap()));
}

fn lindblad(c: &mut Criterion) {
    let p = presets::fig3();
    let space = HilbertSpace::new(p.n_max).unwrap();
    let prop = LindbladPropagator::new(&p.params, &p.drive, &p.dissipation.unwrap(), space).unwrap();
    let rho0 = DensityOperator::basis(space, 0, 0);
    let dt = default_step(prop.max_frequency());
    let grid = TimeGrid::new(0.0, 20.0 * dt, dt, 20).unwrap();
    let mut group = c.benchmark_group("lindblad");
    group.sample_size(10);
    group.bench_function("20 steps", |b| {
        b.iter_batched(|| rho0.clone(), |rho| prop.run(&rho, &grid, |_| {}).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, spectrum, schrodinger, effective, lindblad);
criterion_main!(benches);
