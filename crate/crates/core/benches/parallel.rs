//! Sequential against data-parallel execution on the heavier pipeline stages.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jetsym::condsym::{build_complex_ansatz, characteristic_system_with, determining_system_with, PdeSystem};
use jetsym::expr::{AnsatzFamily, FamilyKind, Workspace};
use jetsym::geometry::VectorFieldFamily;
use jetsym::jet::prolong_with;
use jetsym::liesys::pde_lie_system_with;
use jetsym::par::Exec;
use jetsym::random::Gen;

const MODES: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn label(e: Exec) -> &'static str {
    match e {
        Exec::Sequential => "sequential",
        Exec::Parallel => "parallel",
    }
}

fn prolongation(c: &mut Criterion) {
    let ws = Workspace::new(&["x1", "x2", "x3"], &["u", "v"], 4).unwrap();
    let y = Gen::new(7).field(&ws, 2).unwrap();
    let mut g = c.benchmark_group("prolong order 3");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| prolong_with(black_box(&y), 3, &ws, e).unwrap())
        });
    }
    g.finish();
}

fn characteristic(c: &mut Criterion) {
    let ws = Workspace::new(&["x1", "x2"], &["u"], 4).unwrap();
    let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "exp(x2/u)"], &["exp(x2/u)*u^2"])]).unwrap();
    let mut g = c.benchmark_group("characteristic system order 3");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| characteristic_system_with(black_box(&f), 3, &ws, e).unwrap())
        });
    }
    g.finish();
}

fn determining(c: &mut Criterion) {
    let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
    let args = ws.independent().to_vec();
    for f in ["H", "Qr", "Qi"] {
        ws.add_function(f, &args).unwrap();
    }
    let family = AnsatzFamily::new(FamilyKind::Exponential { kmax: 1 }, ws.dependent()).unwrap();
    let ans = build_complex_ansatz(&family, &ws).unwrap();
    let pde = PdeSystem::parse(
        ans.workspace(),
        &["(u_{x1,x1} + u_{x2,x2})/4 + H(x1,x2)^2*exp(u)/2 - 2*(Qr(x1,x2)^2 + Qi(x1,x2)^2)*exp(-u)"],
    )
    .unwrap();
    let mut g = c.benchmark_group("determining system, exponential ansatz");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| determining_system_with(black_box(&pde), &ans, e).unwrap())
        });
    }
    g.finish();
}

fn closure(c: &mut Criterion) {
    let ws = Workspace::new(&["x"], &["u", "v"], 2).unwrap();
    let nf = Gen::new(11).riccati_normal_form(&ws).unwrap();
    let mut g = c.benchmark_group("Vessiot-Guldberg closure, q = 2");
    for e in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(label(e)), &e, |b, &e| {
            b.iter(|| pde_lie_system_with(black_box(&nf), &ws, 12, e).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = prolongation, characteristic, determining, closure
}
criterion_main!(benches);
