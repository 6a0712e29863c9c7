mod common;

use std::f64::consts::PI;

use common::{brute_projections, literal_weights, random_window, N};
use declip_core::clipping::{detect_clipped, hard_clip, ClipSpec};
use declip_core::engine::{build_weights, generate_window_model, SpectralState, Window, WindowSolver};
use declip_core::synth::harmonic_speech;
use declip_core::{declip, Engine, FseParams, Label};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

fn padded_labels(params: &FseParams) -> Vec<Label> {
    let mut labels = vec![Label::Support; N];
    for l in &mut labels[params.window_len()..] {
        *l = Label::Lost;
    }
    labels
}

/// Window of `0.9 cos(2 pi 64 n / N)` clipped at 0.7, centered on a clipped
/// peak.
fn clipped_cosine_window(params: &FseParams) -> (Vec<f64>, Vec<f64>, Vec<Label>) {
    let s = params.support;
    let clean: Vec<f64> = (0..N)
        .map(|m| 0.9 * (2.0 * PI * 64.0 * (m as f64 - s as f64) / N as f64).cos())
        .collect();
    let mut labels = padded_labels(params);
    let clipped: Vec<f64> = clean
        .iter()
        .zip(&mut labels)
        .map(|(&v, l)| {
            if v.abs() >= 0.7 && *l == Label::Support {
                *l = Label::Lost;
            }
            v.clamp(-0.7, 0.7)
        })
        .collect();
    (clean, clipped, labels)
}

#[test]
fn engines_agree_on_random_windows() {
    let params = FseParams::default();
    let mut spectral = WindowSolver::new(params, Engine::Spectral);
    let mut reference = WindowSolver::new(params, Engine::Reference);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let window = random_window(&mut rng, &params);
        let a = spectral.solve(&window).unwrap();
        let b = reference.solve(&window).unwrap();
        assert_eq!(a.iterations_used, b.iterations_used);
        assert_eq!(
            a.coeffs.keys().collect::<Vec<_>>(),
            b.coeffs.keys().collect::<Vec<_>>(),
            "window {trial}: different selections"
        );
        for (m, (x, y)) in a.synthesize().iter().zip(b.synthesize()).enumerate() {
            assert!((x - y).norm() <= 1e-9, "window {trial}, sample {m}: {x} vs {y}");
        }
    }
}

#[test]
fn engines_agree_on_a_whole_signal() {
    let theta = 0.7;
    let clean = harmonic_speech(3000, 16000);
    let f = hard_clip(&clean, theta).unwrap();
    let mask = detect_clipped(&f, &ClipSpec::exact(theta).unwrap());
    assert!(mask.lost_count() > 0);
    let params = FseParams::default().with_threshold(theta);
    let a = declip(&f, &mask, &params, Engine::Spectral).unwrap();
    let b = declip(&f, &mask, &params, Engine::Reference).unwrap();
    assert_eq!(a.mask, b.mask);
    for (x, y) in a.signal.samples().iter().zip(b.signal.samples()) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn projections_of_a_clipped_cosine_match_the_double_sums() {
    let params = FseParams::default();
    let (_, clipped, labels) = clipped_cosine_window(&params);
    let weights = build_weights(&labels, &params).unwrap();
    let fft = FftPlanner::new().plan_fft_forward(N);
    let fast = SpectralState::new(&clipped, &weights, fft.as_ref()).project();
    let brute = brute_projections(&clipped, &literal_weights(&labels, &params));
    let scale = brute.iter().map(|p| p.norm()).fold(0.0, f64::max);
    for (k, (a, b)) in fast.iter().zip(&brute).enumerate() {
        assert!((a - b).norm() <= 1e-12 * scale, "bin {k}: {a} vs {b}");
    }
}

#[test]
fn clipped_on_bin_cosine_is_recovered_at_the_center() {
    let params = FseParams::default().with_threshold(0.7);
    let (clean, clipped, labels) = clipped_cosine_window(&params);
    let s = params.support;
    for engine in Engine::ALL {
        let model = generate_window_model(&clipped, &labels, &params, engine).unwrap();
        let err = (model.center_value() - clean[s]).abs();
        assert!(err <= 1e-3, "{engine}: |g - s| = {err:e}");
    }
}

#[test]
fn repeated_selection_accumulates_into_one_coefficient() {
    let params = FseParams {
        max_iter: 2,
        ..FseParams::default()
    };
    let mut labels = padded_labels(&params);
    labels[params.support] = Label::Lost;
    let window = Window {
        center: params.support,
        samples: vec![0.4; N],
        labels,
    };
    for engine in Engine::ALL {
        let model = WindowSolver::new(params, engine).solve(&window).unwrap();
        assert_eq!(model.coeffs.len(), 1);
        // 1.25 * 0.4, then 1.25 * (0.4 - 0.5)
        assert!((model.coeffs[&0].re - 0.375).abs() < 1e-12);
        assert!(model.coeffs[&0].im.abs() < 1e-12);
    }
}

#[test]
fn synthesized_models_are_real() {
    let params = FseParams {
        max_iter: 300,
        ..FseParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut solver = WindowSolver::new(params, Engine::Spectral);
    for _ in 0..5 {
        let model = solver.solve(&random_window(&mut rng, &params)).unwrap();
        assert!(model.synthesize().iter().all(|g| g.im.abs() <= 1e-12));
    }
}
