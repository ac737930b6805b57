use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use luka::corpus::{self, FormulaSampler, ScalarPool};
use luka::duality::{presentation_of, zero_set, AlgebraClass, ZeroSet};
use luka::formula::Formula;
use luka::geometry::{polyhedron_equal, RationalPolyhedron};
use luka::par::{self, ExecMode};
use luka::pwl::{compile_exact, pwl_equal};

const SEED: u64 = 20240607;
const MODES: [(&str, ExecMode); 2] = [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)];

fn formulas(count: usize) -> Vec<Formula> {
    let mut rng = corpus::rng(SEED);
    let sampler = FormulaSampler::new(3, 6, ScalarPool::Rational(6));
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

fn polyhedra(count: usize) -> Vec<RationalPolyhedron> {
    let mut rng = corpus::rng(SEED);
    (0..count).map(|_| corpus::polyhedron(&mut rng, 2, 3, 6)).collect()
}

fn compile(c: &mut Criterion) {
    let phis = formulas(40);
    let mut group = c.benchmark_group("compile");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &phis, |b, phis| {
            par::set_mode(mode);
            b.iter(|| phis.iter().map(|phi| compile_exact(phi, 3).unwrap().len()).sum::<usize>());
        });
    }
    group.finish();
}

fn equality(c: &mut Criterion) {
    let pairs: Vec<_> = formulas(20)
        .into_iter()
        .map(|phi| {
            let f = compile_exact(&phi, 3).unwrap();
            let g = compile_exact(&Formula::neg(Formula::neg(phi)), 3).unwrap();
            (f, g)
        })
        .collect();
    let mut group = c.benchmark_group("pwl_equal");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &pairs, |b, pairs| {
            par::set_mode(mode);
            b.iter(|| pairs.iter().all(|(f, g)| pwl_equal(f, g)));
        });
    }
    group.finish();
}

fn duality_roundtrip(c: &mut Criterion) {
    let polys = polyhedra(8);
    let mut group = c.benchmark_group("duality_roundtrip");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &polys, |b, polys| {
            par::set_mode(mode);
            b.iter(|| {
                polys.iter().all(|p| {
                    let pres = presentation_of(p, AlgebraClass::DMV).unwrap();
                    matches!(zero_set(&pres), ZeroSet::Exact(z) if polyhedron_equal(&z, p))
                })
            });
        });
    }
    group.finish();
}

criterion_group!(benches, compile, equality, duality_roundtrip);
criterion_main!(benches);
