//! Model generation with an explicit time-domain residual.
//!
//! Each iteration transforms `r[n] w[n]` from scratch to obtain the
//! projections, evaluates the selected pair's cross term by direct
//! summation and subtracts the selected component sample by sample. Slower
//! than the spectral path by a transform per iteration, and independent of
//! its update algebra.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::Fft;

use crate::engine::spectral::{is_self_conjugate, pair_coefficient, FitGain};
use crate::engine::weights::WeightVector;
use crate::engine::window::WindowModel;
use crate::params::FseParams;

pub(crate) struct TimeDomainEngine {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    residual: Vec<f64>,
    buf: Vec<Complex64>,
    half_re: Vec<f64>,
    half_im: Vec<f64>,
}

impl TimeDomainEngine {
    pub(crate) fn new(n: usize) -> Self {
        let (cos, sin) = (0..n)
            .map(|m| {
                let (s, c) = (2.0 * PI * m as f64 / n as f64).sin_cos();
                (c, s)
            })
            .unzip();
        Self {
            n,
            cos,
            sin,
            residual: vec![0.0; n],
            buf: vec![Complex64::default(); n],
            half_re: vec![0.0; n / 2 + 1],
            half_im: vec![0.0; n / 2 + 1],
        }
    }

    fn weighted_energy(&self, w: &[f64]) -> f64 {
        self.residual.iter().zip(w).map(|(r, w)| w * r * r).sum()
    }

    fn transform(&mut self, w: &[f64], fft: &dyn Fft<f64>) {
        for ((b, r), w) in self.buf.iter_mut().zip(&self.residual).zip(w) {
            *b = Complex64::new(r * w, 0.0);
        }
        fft.process(&mut self.buf);
        for k in 0..self.half_re.len() {
            self.half_re[k] = self.buf[k].re;
            self.half_im[k] = self.buf[k].im;
        }
    }

    /// `sum_n w[n] conj(phi_u[n])^2`.
    fn cross_term(&self, w: &[f64], u: usize) -> Complex64 {
        let mask = self.n - 1;
        let mut acc = Complex64::default();
        for (m, &wm) in w.iter().enumerate() {
            if wm != 0.0 {
                let idx = (2 * u * m) & mask;
                acc += Complex64::new(wm * self.cos[idx], -wm * self.sin[idx]);
            }
        }
        acc
    }

    pub(crate) fn run(
        &mut self,
        f_window: &[f64],
        weights: &WeightVector,
        fft: &dyn Fft<f64>,
        model: &mut WindowModel,
        params: &FseParams,
        mut trace: Option<&mut Vec<f64>>,
    ) {
        let n = self.n;
        let mask = n - 1;
        let w = weights.values();
        let sum_w = weights.sum();
        let mut ww: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut ww);
        let gain = FitGain::new(&ww, sum_w);
        self.residual.copy_from_slice(f_window);
        let initial = self.weighted_energy(w);
        if let Some(t) = trace.as_mut() {
            t.push(initial);
        }
        let mut energy = initial;
        let mut nu = 0;
        while nu < params.max_iter {
            if params.residual_tol > 0.0 && energy <= params.residual_tol * initial {
                model.converged = true;
                break;
            }
            self.transform(w, fft);
            let Some(u) = gain.best(&self.half_re, &self.half_im) else {
                model.converged = true;
                break;
            };
            let p_u = Complex64::new(self.half_re[u], self.half_im[u]) / sum_w;
            if is_self_conjugate(u, n) {
                let c = params.gamma * p_u.re;
                for (m, r) in self.residual.iter_mut().enumerate() {
                    *r -= c * self.cos[(u * m) & mask];
                }
                model.accumulate(u, Complex64::new(c, 0.0));
            } else {
                let cross = self.cross_term(w, u);
                let c = pair_coefficient(p_u, cross, sum_w) * params.gamma;
                for (m, r) in self.residual.iter_mut().enumerate() {
                    let idx = (u * m) & mask;
                    *r -= 2.0 * (c.re * self.cos[idx] - c.im * self.sin[idx]);
                }
                model.accumulate(u, c);
                model.accumulate(n - u, c.conj());
            }
            nu += 1;
            energy = self.weighted_energy(w);
            if let Some(t) = trace.as_mut() {
                t.push(energy);
            }
        }
        model.iterations_used = nu;
    }
}
