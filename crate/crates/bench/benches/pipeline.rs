use std::collections::BTreeMap;
use std::path::PathBuf;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use noether_cli::{load, run_solve, RunOptions};
use noether_core::calculus::LagrangianSpec;
use noether_core::conserved::{bootstrap_sigma, noether_charge, offshell_residue};
use noether_core::expr::parse;
use noether_core::numeric::{drift, integrate, reduce_to_first_order};
use noether_core::symmetry::{find_symmetries, AnsatzConfig};
use noether_core::DEFAULT_ORDER_CAP as CAP;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.prob"))
}

fn spinning_spec() -> LagrangianSpec {
    let l = parse("(1/2)*(x''^2 - x'^2)", &["x"], &BTreeMap::new()).unwrap();
    LagrangianSpec::new(1, 2, l).unwrap()
}

fn bench_determining_system(c: &mut Criterion) {
    let spec = spinning_spec();
    let config = AnsatzConfig::default();
    c.bench_function("spinning: ansatz + system + nullspace", |b| {
        b.iter(|| find_symmetries(black_box(&spec), &config, CAP).unwrap())
    });
}

fn bench_charges(c: &mut Criterion) {
    let spec = spinning_spec();
    let (_, _, generators) = find_symmetries(&spec, &AnsatzConfig::default(), CAP).unwrap();
    let sigma = bootstrap_sigma(CAP).unwrap();
    c.bench_function("spinning: charges + off-shell residues", |b| {
        b.iter(|| {
            for g in &generators {
                let q = noether_charge(&spec, g, CAP).unwrap();
                assert!(offshell_residue(&spec, &q, sigma, CAP).unwrap().is_zero());
            }
        })
    });
}

fn bench_rk4(c: &mut Criterion) {
    let spec = spinning_spec();
    let sys = reduce_to_first_order(&spec, CAP).unwrap();
    let charge = parse("x''*cos(t) - x'''*sin(t)", &["x"], &BTreeMap::new()).unwrap();
    c.bench_function("spinning: RK4 10k steps + drift", |b| {
        b.iter(|| {
            let traj = integrate(&sys, &[1.0, 0.0, -1.0, 0.0], 10.0, 1e-3).unwrap();
            drift(&traj, &sys, &charge).unwrap()
        })
    });
}

fn bench_full_pipeline(c: &mut Criterion) {
    let problem = load(&fixture("cs_particle")).unwrap();
    let opts = RunOptions::default();
    c.bench_function("cs_particle: full solve pipeline", |b| {
        b.iter(|| run_solve(black_box(&problem), &opts).unwrap())
    });
}

criterion_group!(
    benches,
    bench_determining_system,
    bench_charges,
    bench_rk4,
    bench_full_pipeline
);
criterion_main!(benches);
