//! Frequency-domain model generation.
//!
//! The weighted residual `r[n] w[n]` is never formed in the time domain.
//! Its DFT `Wr` is computed once from the windowed input and then updated
//! per iteration: subtracting `c * phi_u` from the residual subtracts
//! `c * Ww[k - u]` from every bin, where `Ww` is the DFT of the weights.
//! Because the residual is real, only bins `0..=N/2` are tracked.

use rustfft::num_complex::Complex64;
use rustfft::Fft;

use crate::engine::weights::WeightVector;
use crate::engine::window::WindowModel;

/// Below this relative determinant the conjugate pair is treated as
/// linearly dependent under the weights.
const SINGULAR_PAIR: f64 = 1e-10;

/// Outcome of the basis selection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Basis(usize),
    /// Every projection coefficient is zero.
    Converged,
}

/// Weighted residual energy removed by fitting each bin, as a quadratic form
/// in the real and imaginary part of the bin's weighted residual spectrum:
/// `gain_k = qa[k] a^2 + qb[k] b^2 + qab[k] a b` for `Wr[k] = a + ib`.
///
/// For a conjugate pair this is the reduction achieved by the least-squares
/// coefficient of [`pair_coefficient`], for DC and Nyquist that of the real
/// projection. The coefficients depend on the weights only.
#[derive(Debug, Clone)]
pub struct FitGain {
    qa: Vec<f64>,
    qb: Vec<f64>,
    qab: Vec<f64>,
}

impl FitGain {
    /// `ww` is the length-N DFT of the weights, `sum_w` their sum.
    pub fn new(ww: &[Complex64], sum_w: f64) -> Self {
        let n = ww.len();
        let s = sum_w;
        let half = n / 2 + 1;
        let (mut qa, mut qb, mut qab) = (vec![0.0; half], vec![0.0; half], vec![0.0; half]);
        for k in 0..half {
            if is_self_conjugate(k, n) {
                qa[k] = 1.0 / s;
                continue;
            }
            let g = ww[(2 * k) % n];
            let det = s * s - g.norm_sqr();
            if det <= SINGULAR_PAIR * s * s {
                qa[k] = 1.5 / s - g.re / (2.0 * s * s);
                qb[k] = 1.5 / s + g.re / (2.0 * s * s);
                qab[k] = -g.im / (s * s);
            } else {
                qa[k] = 2.0 * (s - g.re) / det;
                qb[k] = 2.0 * (s + g.re) / det;
                qab[k] = -4.0 * g.im / det;
            }
        }
        Self { qa, qb, qab }
    }

    pub fn gain(&self, k: usize, wr: Complex64) -> f64 {
        self.qa[k] * wr.re * wr.re + self.qb[k] * wr.im * wr.im + self.qab[k] * wr.re * wr.im
    }

    /// Bin with the largest gain, smallest index on ties, `None` when no bin
    /// reduces the residual.
    pub(crate) fn best(&self, re: &[f64], im: &[f64]) -> Option<usize> {
        let mut best = 0.0;
        let mut best_k = None;
        for k in 0..self.qa.len() {
            let (a, b) = (re[k], im[k]);
            let gain = self.qa[k] * a * a + self.qb[k] * b * b + self.qab[k] * a * b;
            if gain > best {
                best = gain;
                best_k = Some(k);
            }
        }
        best_k
    }
}

/// Chooses the frequency bin whose fit removes the most weighted residual
/// energy. `wr` and `ww` are the length-N DFTs of the weighted residual and
/// of the weights. Only `0..=N/2` is searched; bin `N - u` is the conjugate
/// partner of `u` and enters the model together with it.
pub fn select_basis(wr: &[Complex64], ww: &[Complex64], sum_w: f64) -> Selection {
    let half = wr.len() / 2 + 1;
    let (re, im): (Vec<f64>, Vec<f64>) = wr[..half].iter().map(|c| (c.re, c.im)).unzip();
    match FitGain::new(ww, sum_w).best(&re, &im) {
        Some(u) => Selection::Basis(u),
        None => Selection::Converged,
    }
}

/// Whether bin `u` is its own conjugate partner (DC or Nyquist).
pub fn is_self_conjugate(u: usize, n: usize) -> bool {
    u == 0 || 2 * u == n
}

/// Expansion coefficient for the conjugate pair `(u, N - u)`.
///
/// `p_u` is the weighted projection onto `phi_u`, `cross` is
/// `sum w[n] conj(phi_u[n])^2` and `sum_w` is `sum w[n]`. Returns the
/// weighted least-squares coefficient `c` of `c phi_u + conj(c) phi_{N-u}`,
/// i.e. the solution of `c S + conj(c) G = S p_u`. With orthogonal partners
/// (`G = 0`) this is `p_u` itself. The ODC factor is applied by the caller.
pub fn pair_coefficient(p_u: Complex64, cross: Complex64, sum_w: f64) -> Complex64 {
    let det = sum_w * sum_w - cross.norm_sqr();
    if det <= SINGULAR_PAIR * sum_w * sum_w {
        // Partners coincide on the support; the minimum-norm solution.
        return p_u * 0.5;
    }
    (p_u * sum_w - cross * p_u.conj()) * (sum_w / det)
}

/// Spectra of one window during model generation.
#[derive(Debug, Clone)]
pub struct SpectralState {
    n: usize,
    wr_re: Vec<f64>,
    wr_im: Vec<f64>,
    // Ww over 0..2N so that Ww[(k - u) mod N] and Ww[(k + u) mod N] are
    // contiguous slices for k in 0..=N/2.
    ww_re: Vec<f64>,
    ww_im: Vec<f64>,
    sum_w: f64,
    gain: FitGain,
    energy: f64,
    nu: usize,
}

impl SpectralState {
    /// Transforms the weighted window and the weights. `fft` must be a
    /// forward transform of the window length.
    pub fn new(f_window: &[f64], weights: &WeightVector, fft: &dyn Fft<f64>) -> Self {
        let n = f_window.len();
        assert_eq!(weights.len(), n, "weights and window differ in length");
        assert_eq!(fft.len(), n, "transform size differs from the window");
        let w = weights.values();
        let half = n / 2 + 1;

        let mut buf: Vec<Complex64> = f_window
            .iter()
            .zip(w)
            .map(|(f, w)| Complex64::new(f * w, 0.0))
            .collect();
        fft.process(&mut buf);
        let (wr_re, wr_im) = buf[..half].iter().map(|c| (c.re, c.im)).unzip();

        let mut wbuf: Vec<Complex64> = w.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        fft.process(&mut wbuf);
        let (ww_re, ww_im) = wbuf.iter().chain(&wbuf).map(|c| (c.re, c.im)).unzip();

        let energy = f_window.iter().zip(w).map(|(f, w)| w * f * f).sum();
        let gain = FitGain::new(&wbuf, weights.sum());

        Self {
            n,
            wr_re,
            wr_im,
            ww_re,
            ww_im,
            sum_w: weights.sum(),
            gain,
            energy,
            nu: 0,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.n
    }

    pub fn iteration(&self) -> usize {
        self.nu
    }

    pub fn sum_w(&self) -> f64 {
        self.sum_w
    }

    /// Weighted residual energy `sum w[n] r[n]^2`, tracked analytically.
    pub fn weighted_energy(&self) -> f64 {
        self.energy
    }

    fn wr(&self, k: usize) -> Complex64 {
        if k <= self.n / 2 {
            Complex64::new(self.wr_re[k], self.wr_im[k])
        } else {
            Complex64::new(self.wr_re[self.n - k], -self.wr_im[self.n - k])
        }
    }

    fn ww(&self, k: usize) -> Complex64 {
        Complex64::new(self.ww_re[k % self.n], self.ww_im[k % self.n])
    }

    /// Full length-N DFT of the current weighted residual.
    pub fn weighted_residual_spectrum(&self) -> Vec<Complex64> {
        (0..self.n).map(|k| self.wr(k)).collect()
    }

    /// Full length-N DFT of the weights.
    pub fn weight_spectrum(&self) -> Vec<Complex64> {
        (0..self.n).map(|k| self.ww(k)).collect()
    }

    /// Weighted projection coefficients onto every basis function.
    ///
    /// Since `|phi_k[n]|^2 = 1`, the denominator of the projection is
    /// `sum w[n]` for every `k`, so `p_k = Wr[k] / sum w`.
    pub fn project(&self) -> Vec<Complex64> {
        (0..self.n).map(|k| self.wr(k) / self.sum_w).collect()
    }

    /// Basis function chosen by the next iteration.
    pub fn select(&self) -> Selection {
        match self.peak_bin() {
            Some(u) => Selection::Basis(u),
            None => Selection::Converged,
        }
    }

    pub(crate) fn peak_bin(&self) -> Option<usize> {
        self.gain.best(&self.wr_re, &self.wr_im)
    }

    pub(crate) fn projection_at(&self, u: usize) -> Complex64 {
        self.wr(u) / self.sum_w
    }

    /// Adds `gamma` times the projection estimate for bin `u` to the model
    /// and removes it from the residual spectrum. Returns the coefficient
    /// stored at `u`.
    pub fn odc_update(
        &mut self,
        model: &mut WindowModel,
        u: usize,
        p_u: Complex64,
        gamma: f64,
    ) -> Complex64 {
        assert!(u <= self.n / 2, "selection is made among bins 0..=N/2");
        let wr_u = self.wr(u);
        let c = if is_self_conjugate(u, self.n) {
            let c = gamma * p_u.re;
            self.energy += -2.0 * c * wr_u.re + c * c * self.sum_w;
            self.subtract_single(u, Complex64::new(c, 0.0));
            model.accumulate(u, Complex64::new(c, 0.0));
            Complex64::new(c, 0.0)
        } else {
            let cross = self.ww(2 * u);
            let c = pair_coefficient(p_u, cross, self.sum_w) * gamma;
            self.energy += -4.0 * (c * wr_u.conj()).re
                + 2.0 * c.norm_sqr() * self.sum_w
                + 2.0 * (c * c * cross.conj()).re;
            self.subtract_pair(u, c);
            model.accumulate(u, c);
            model.accumulate(self.n - u, c.conj());
            c
        };
        self.nu += 1;
        c
    }

    /// `Wr[k] -= c * Ww[k - u]` for the half spectrum.
    ///
    /// For a single complex term this breaks the Hermitian symmetry the
    /// half-spectrum storage relies on; it is only exposed for
    /// self-conjugate bins and for tests of the update algebra.
    pub fn subtract_single(&mut self, u: usize, c: Complex64) {
        let half = self.wr_re.len();
        let a_re = &self.ww_re[self.n - u..self.n - u + half];
        let a_im = &self.ww_im[self.n - u..self.n - u + half];
        for k in 0..half {
            self.wr_re[k] -= c.re * a_re[k] - c.im * a_im[k];
            self.wr_im[k] -= c.re * a_im[k] + c.im * a_re[k];
        }
    }

    /// `Wr[k] -= c * Ww[k - u] + conj(c) * Ww[k + u]`, the image of removing
    /// the real component `c phi_u + conj(c) phi_{N-u}` from the residual.
    fn subtract_pair(&mut self, u: usize, c: Complex64) {
        let half = self.wr_re.len();
        let a_re = &self.ww_re[self.n - u..self.n - u + half];
        let a_im = &self.ww_im[self.n - u..self.n - u + half];
        let b_re = &self.ww_re[u..u + half];
        let b_im = &self.ww_im[u..u + half];
        let (cr, ci) = (c.re, c.im);
        for k in 0..half {
            self.wr_re[k] -= cr * (a_re[k] + b_re[k]) - ci * (a_im[k] - b_im[k]);
            self.wr_im[k] -= cr * (a_im[k] + b_im[k]) + ci * (a_re[k] - b_re[k]);
        }
    }
}
