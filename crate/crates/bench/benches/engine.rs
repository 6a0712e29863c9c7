use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use declip_core::clipping::{detect_clipped, hard_clip, ClipSpec};
use declip_core::engine::{extract_window, WindowSolver};
use declip_core::synth::harmonic_speech;
use declip_core::{declip, Engine, FseParams, Label};

fn window_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("window_solve");
    group.sample_size(10);
    let samples: Vec<f64> = (0..4001)
        .map(|n| (2.0 * PI * 0.013 * n as f64).sin() + 0.3 * (2.0 * PI * 0.051 * n as f64).cos())
        .collect();
    let mut labels = vec![Label::Support; samples.len()];
    for l in &mut labels[1995..2006] {
        *l = Label::Lost;
    }
    for iters in [100, 1500] {
        let params = FseParams {
            max_iter: iters,
            ..FseParams::default()
        };
        let window = extract_window(&samples, &labels, 2000, &params);
        for engine in Engine::ALL {
            let mut solver = WindowSolver::new(params, engine);
            group.bench_with_input(BenchmarkId::new(engine.as_str(), iters), &window, |b, w| {
                b.iter(|| solver.solve(black_box(w)).unwrap())
            });
        }
    }
    group.finish();
}

fn declip_speech(c: &mut Criterion) {
    let mut group = c.benchmark_group("declip_speech_0.25s");
    group.sample_size(10);
    let clean = harmonic_speech(4000, 16000);
    for theta in [0.5, 0.9] {
        let f = hard_clip(&clean, theta).unwrap();
        let mask = detect_clipped(&f, &ClipSpec::exact(theta).unwrap());
        let params = FseParams::default().with_threshold(theta);
        group.bench_with_input(BenchmarkId::from_parameter(theta), &(f, mask), |b, (f, mask)| {
            b.iter(|| declip(f, mask, &params, Engine::Spectral).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, window_solve, declip_speech);
criterion_main!(benches);
