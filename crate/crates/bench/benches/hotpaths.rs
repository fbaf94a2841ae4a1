//! Hot-path benchmarks: per-realization kernels that dominate the Monte
//! Carlo suites, plus the special functions behind the analytic curves.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use metasir::{
    analytics, mc, model, Complex64, McConfig, ReliabilityTarget, SamplingConfig, SirThreshold,
    SuccessProfile, ThresholdInfo,
};
use metasir_bench::{fig_params, standard_realization};

fn bench_sampling(c: &mut Criterion) {
    let p = fig_params();
    let cfg = SamplingConfig::from_tolerance(&p, 1e-4, 1).unwrap();
    c.bench_function("sample_realization_tol1e-4", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(metasir::pointproc::sample_realization(
                &p,
                &cfg.with_seed(seed),
            ))
        })
    });
}

fn bench_model(c: &mut Criterion) {
    let p = fig_params();
    let r = standard_realization(7);
    let theta = SirThreshold::new(1.0).unwrap();
    let target = ReliabilityTarget::from_nu(0.9).unwrap();

    c.bench_function("conditional_success_6e3", |b| {
        b.iter(|| black_box(model::conditional_success(&r, &p, theta)))
    });
    c.bench_function("profile_build_6e3", |b| {
        b.iter(|| black_box(SuccessProfile::new(&r, &p, 1.0)))
    });
    let profile = SuccessProfile::new(&r, &p, 1.0);
    c.bench_function("profile_solve_threshold", |b| {
        b.iter(|| black_box(profile.solve_threshold(target).unwrap()))
    });
}

fn bench_streaming(c: &mut Criterion) {
    let p = fig_params();
    let target = ReliabilityTarget::from_epsilon(1e-3).unwrap();
    // tol 1e-5 keeps one iteration near 60k points
    let cfg = McConfig::new(1, 3).unwrap().with_truncation_tol(1e-5).unwrap();
    let grid = [1e-4];
    c.bench_function("streamed_threshold_realization_6e4pts", |b| {
        b.iter(|| {
            black_box(
                mc::estimate_threshold_ccdf(&p, target, &grid, &cfg, ThresholdInfo::Full)
                    .unwrap(),
            )
        })
    });
}

fn bench_analytics(c: &mut Criterion) {
    let p = fig_params();
    let theta = SirThreshold::new(1.0).unwrap();
    c.bench_function("md_gil_pelaez_midpoint", |b| {
        b.iter(|| black_box(analytics::md_gil_pelaez(&p, theta, 0.9).unwrap()))
    });
    c.bench_function("md_binomial_mixture_n20", |b| {
        b.iter(|| black_box(analytics::md_binomial_mixture(&p, theta, 0.9, 20).unwrap()))
    });
}

fn bench_special(c: &mut Criterion) {
    c.bench_function("erfc_mid", |b| b.iter(|| black_box(metasir::special::erfc(black_box(1.7)))));
    c.bench_function("dawson_mid", |b| {
        b.iter(|| black_box(metasir::special::dawson(black_box(2.3))))
    });
    c.bench_function("log_gamma_complex", |b| {
        b.iter(|| {
            black_box(
                metasir::special::log_gamma_complex(black_box(Complex64::new(0.5, 40.0)))
                    .unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_sampling,
    bench_model,
    bench_streaming,
    bench_analytics,
    bench_special
);
criterion_main!(benches);
