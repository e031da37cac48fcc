use criterion::{criterion_group, criterion_main, Criterion};
use ddr_bench::{hexacut, reduced_system, tresca};
use ddr_core::contact::{newton_solve, NewtonConfig};
use ddr_core::ddr::Operators;

fn operators(c: &mut Criterion) {
    let d = hexacut(4);
    c.bench_function("operators hexacut n=4", |b| b.iter(|| Operators::build(&d.mesh, &d.dofmap).unwrap()));
}

fn assembly(c: &mut Criterion) {
    let case = tresca();
    let d = hexacut(4);
    c.bench_function("assembly hexacut n=4", |b| b.iter(|| reduced_system(&case, &d)));
}

fn newton(c: &mut Criterion) {
    let case = tresca();
    let d = hexacut(4);
    let sys = reduced_system(&case, &d);
    let mut g = c.benchmark_group("newton");
    g.sample_size(10);
    g.bench_function("tresca hexacut n=4", |b| b.iter(|| newton_solve(&sys, &NewtonConfig::default(), None).unwrap()));
    g.finish();
}

criterion_group!(benches, operators, assembly, newton);
criterion_main!(benches);
