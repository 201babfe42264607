use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mcsched_core::lp::{solve_lp, DEFAULT_TOLERANCE};
use mcsched_core::milp::{relax, solve_milp};
use mcsched_core::model::build;
use mcsched_core::net::generate_instance;
use mcsched_core::rounding::milp_relax_schedule;
use mcsched_core::verify::brute_force_opt;
use mcsched_core::{FormulationKind, InstanceConfig, MilpOptions, NetworkInstance, SchedParams};

fn instance(n: usize, seed: u64) -> NetworkInstance {
    generate_instance(&InstanceConfig { num_sources: n, group_size: 2, seed, ..Default::default() }).unwrap()
}

fn lp_relaxation(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp_relaxation");
    for n in [2usize, 4, 6] {
        let f = build(FormulationKind::DmcOpt, &instance(n, 7), &SchedParams::new(4, 1)).unwrap();
        let lp = relax(&f.problem);
        g.bench_with_input(BenchmarkId::from_parameter(n), &lp, |b, lp| {
            b.iter(|| solve_lp(black_box(lp), DEFAULT_TOLERANCE).unwrap())
        });
    }
    g.finish();
}

fn milp(c: &mut Criterion) {
    let mut g = c.benchmark_group("milp");
    g.sample_size(10);
    for (kind, n) in [(FormulationKind::DmcOptCp, 3usize), (FormulationKind::McAllCp, 3), (FormulationKind::DmcOpt, 2)] {
        let f = build(kind, &instance(n, 11), &SchedParams::new(3, 1)).unwrap();
        g.bench_function(format!("{kind}/N={n}"), |b| {
            b.iter(|| solve_milp(black_box(&f.problem), &MilpOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn heuristic(c: &mut Criterion) {
    let mut g = c.benchmark_group("heuristic");
    g.sample_size(10);
    for n in [2usize, 3] {
        let inst = instance(n, 5);
        let params = SchedParams::new(4, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| milp_relax_schedule(black_box(inst), &params))
        });
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let inst = instance(2, 3);
    let params = SchedParams::new(2, 1);
    c.bench_function("brute_force/dmc-opt-cp/N=2,T=2", |b| {
        b.iter(|| brute_force_opt(black_box(&inst), &params, FormulationKind::DmcOptCp).unwrap())
    });
}

criterion_group!(benches, lp_relaxation, milp, heuristic, brute_force);
criterion_main!(benches);
