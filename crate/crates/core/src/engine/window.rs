use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::engine::reference::TimeDomainEngine;
use crate::engine::spectral::SpectralState;
use crate::engine::weights::{build_weights, WeightVector};
use crate::engine::{Engine, WindowError};
use crate::params::FseParams;
use crate::signal::Label;

/// Sparse Fourier model of one extrapolation window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowModel {
    /// Sample the model was built for.
    pub center: usize,
    /// Position of `center` inside the window.
    pub offset: usize,
    pub fft_size: usize,
    /// Expansion coefficients by frequency bin. Conjugate-symmetric: bin
    /// `N - k` holds the conjugate of bin `k`.
    pub coeffs: BTreeMap<usize, Complex64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl WindowModel {
    pub fn empty(center: usize, offset: usize, fft_size: usize) -> Self {
        Self {
            center,
            offset,
            fft_size,
            coeffs: BTreeMap::new(),
            iterations_used: 0,
            converged: false,
        }
    }

    pub(crate) fn accumulate(&mut self, k: usize, c: Complex64) {
        *self.coeffs.entry(k).or_default() += c;
    }

    /// Model value at window position `m`.
    pub fn evaluate(&self, m: usize) -> Complex64 {
        let n = self.fft_size;
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * ((k * m) % n) as f64 / n as f64))
            .sum()
    }

    /// Real part of the model at the reconstructed sample.
    pub fn center_value(&self) -> f64 {
        self.evaluate(self.offset).re
    }

    /// Model over the whole transform length.
    pub fn synthesize(&self) -> Vec<Complex64> {
        let n = self.fft_size;
        let mut buf = vec![Complex64::default(); n];
        for (&k, &c) in &self.coeffs {
            buf[k] = c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }
}

/// Samples and labels of one extrapolation window.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub center: usize,
    pub samples: Vec<f64>,
    pub labels: Vec<Label>,
}

/// Cuts the window of `params.fft_size` samples around `center`. The center
/// lands at position `params.support`; positions beyond the signal or past
/// the extrapolation area are zero and labeled lost so they carry no weight.
pub fn extract_window(samples: &[f64], labels: &[Label], center: usize, params: &FseParams) -> Window {
    let n = params.fft_size;
    let s = params.support;
    let mut w_samples = vec![0.0; n];
    let mut w_labels = vec![Label::Lost; n];
    let lo = center.saturating_sub(s);
    let hi = (center + s + 1).min(samples.len());
    let first = lo + s - center;
    w_samples[first..first + hi - lo].copy_from_slice(&samples[lo..hi]);
    w_labels[first..first + hi - lo].copy_from_slice(&labels[lo..hi]);
    Window {
        center,
        samples: w_samples,
        labels: w_labels,
    }
}

/// Reusable per-worker machinery for generating window models.
pub struct WindowSolver {
    params: FseParams,
    engine: Engine,
    fft: Arc<dyn Fft<f64>>,
    time_domain: Option<TimeDomainEngine>,
}

impl WindowSolver {
    pub fn new(params: FseParams, engine: Engine) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(params.fft_size);
        let time_domain = match engine {
            Engine::Reference => Some(TimeDomainEngine::new(params.fft_size)),
            Engine::Spectral => None,
        };
        Self {
            params,
            engine,
            fft,
            time_domain,
        }
    }

    pub fn params(&self) -> &FseParams {
        &self.params
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn solve(&mut self, window: &Window) -> Result<WindowModel, WindowError> {
        self.solve_impl(window, None)
    }

    /// Like [`solve`](Self::solve), also returning the weighted residual
    /// energy before the first iteration and after every iteration.
    pub fn solve_traced(&mut self, window: &Window) -> Result<(WindowModel, Vec<f64>), WindowError> {
        let mut trace = Vec::new();
        let model = self.solve_impl(window, Some(&mut trace))?;
        Ok((model, trace))
    }

    fn check(&self, window: &Window) -> Result<(), WindowError> {
        let n = self.params.fft_size;
        for len in [window.samples.len(), window.labels.len()] {
            if len != n {
                return Err(WindowError::LengthMismatch { expected: n, got: len });
            }
        }
        if n < self.params.window_len() || !n.is_power_of_two() {
            return Err(WindowError::Geometry {
                support: self.params.support,
                fft_size: n,
            });
        }
        if !window.labels[self.params.support].is_lost() {
            return Err(WindowError::CenterNotLost);
        }
        Ok(())
    }

    fn solve_impl(&mut self, window: &Window, trace: Option<&mut Vec<f64>>) -> Result<WindowModel, WindowError> {
        self.check(window)?;
        let weights = build_weights(&window.labels, &self.params)?;
        let mut model = WindowModel::empty(window.center, self.params.support, self.params.fft_size);
        match self.engine {
            Engine::Spectral => {
                let state = SpectralState::new(&window.samples, &weights, self.fft.as_ref());
                run_spectral(state, &mut model, &self.params, trace);
            }
            Engine::Reference => {
                let td = self.time_domain.as_mut().expect("created with the engine");
                td.run(&window.samples, &weights, self.fft.as_ref(), &mut model, &self.params, trace);
            }
        }
        Ok(model)
    }
}

fn run_spectral(mut state: SpectralState, model: &mut WindowModel, params: &FseParams, mut trace: Option<&mut Vec<f64>>) {
    let initial = state.weighted_energy();
    if let Some(t) = trace.as_mut() {
        t.push(initial);
    }
    while state.iteration() < params.max_iter {
        if params.residual_tol > 0.0 && state.weighted_energy() <= params.residual_tol * initial {
            model.converged = true;
            break;
        }
        let Some(u) = state.peak_bin() else {
            model.converged = true;
            break;
        };
        let p_u = state.projection_at(u);
        state.odc_update(model, u, p_u, params.gamma);
        if let Some(t) = trace.as_mut() {
            t.push(state.weighted_energy());
        }
    }
    model.iterations_used = state.iteration();
}

/// One-shot model generation for a window whose center (position
/// `params.support`) is lost.
pub fn generate_window_model(
    f_window: &[f64],
    mask_window: &[Label],
    params: &FseParams,
    engine: Engine,
) -> Result<WindowModel, WindowError> {
    let window = Window {
        center: params.support,
        samples: f_window.to_vec(),
        labels: mask_window.to_vec(),
    };
    WindowSolver::new(*params, engine).solve(&window)
}

/// Keeps an estimate between the clipping level and the peak, on the side of
/// the rail the measured sample was clipped to.
pub fn clamp_estimate(g_center: f64, original_clipped_value: f64, params: &FseParams) -> f64 {
    let (theta, peak) = (params.clip_threshold, params.peak);
    if original_clipped_value >= 0.0 {
        g_center.clamp(theta, peak)
    } else {
        g_center.clamp(-peak, -theta)
    }
}

/// Weights for a window, exposed for inspection.
pub fn window_weights(window: &Window, params: &FseParams) -> Result<WeightVector, WindowError> {
    build_weights(&window.labels, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 2048;

    fn params() -> FseParams {
        FseParams::default()
    }

    #[test]
    fn clamp_examples() {
        let p = params().with_threshold(0.7);
        assert_eq!(clamp_estimate(0.93, 0.7, &p), 0.93);
        assert_eq!(clamp_estimate(0.42, 0.7, &p), 0.7);
        assert_eq!(clamp_estimate(-1.3, -0.7, &p), -1.0);
        assert_eq!(clamp_estimate(0.2, -0.7, &p), -0.7);
    }

    #[test]
    fn window_extraction_pads_at_edges() {
        let p = FseParams {
            support: 3,
            fft_size: 8,
            ..Default::default()
        };
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let labels = vec![Label::Support; 10];
        let w = extract_window(&x, &labels, 1, &p);
        assert_eq!(w.samples, vec![0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 0.0]);
        assert_eq!(w.labels[0], Label::Lost);
        assert_eq!(w.labels[2], Label::Support);
        assert_eq!(w.labels[7], Label::Lost);
        let w = extract_window(&x, &labels, 9, &p);
        assert_eq!(w.samples, vec![7.0, 8.0, 9.0, 10.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_with_masked_center_is_recovered() {
        let theta = 0.7;
        let mut f = vec![0.8; N];
        let mut labels = vec![Label::Support; N];
        for m in 999..=1001 {
            f[m] = theta;
            labels[m] = Label::Lost;
        }
        let p = params().with_threshold(theta);
        for engine in [Engine::Spectral, Engine::Reference] {
            let model = generate_window_model(&f, &labels, &p, engine).unwrap();
            assert!(
                (model.center_value() - 0.8).abs() < 1e-6,
                "{engine}: {}",
                model.center_value()
            );
        }
    }

    #[test]
    fn zero_iterations_give_zero_model() {
        let p = FseParams {
            max_iter: 0,
            ..params()
        };
        let mut labels = vec![Label::Support; N];
        labels[1000] = Label::Lost;
        let model = generate_window_model(&vec![0.5; N], &labels, &p, Engine::Spectral).unwrap();
        assert!(model.coeffs.is_empty());
        assert!(!model.converged);
        assert!(model.synthesize().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn window_errors() {
        let p = params();
        let labels = vec![Label::Support; N];
        assert_eq!(
            generate_window_model(&vec![0.0; N], &labels, &p, Engine::Spectral),
            Err(WindowError::CenterNotLost)
        );
        let lost = vec![Label::Lost; N];
        assert_eq!(
            generate_window_model(&vec![0.0; N], &lost, &p, Engine::Spectral),
            Err(WindowError::NoSupport)
        );
        assert!(matches!(
            generate_window_model(&[0.0; 10], &lost[..10], &p, Engine::Spectral),
            Err(WindowError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn synthesized_model_is_real() {
        let f: Vec<f64> = (0..N)
            .map(|n| (n as f64 * 0.031).sin() + 0.4 * (n as f64 * 0.17).cos())
            .collect();
        let mut labels = vec![Label::Support; N];
        for m in 980..1030 {
            labels[m] = Label::Lost;
        }
        let p = FseParams {
            max_iter: 100,
            ..params()
        };
        let model = generate_window_model(&f, &labels, &p, Engine::Spectral).unwrap();
        assert!(model.coeffs.len() <= 2 * p.max_iter);
        for (&k, &c) in &model.coeffs {
            let partner = model.coeffs[&((N - k) % N)];
            assert!((partner - c.conj()).norm() <= 1e-12 * c.norm().max(1.0));
        }
        let g = model.synthesize();
        assert!(g.iter().all(|v| v.im.abs() <= 1e-12));
        assert!((g[1000].re - model.center_value()).abs() < 1e-9);
    }
}
