#![allow(dead_code)]

use std::f64::consts::PI;

use declip_core::engine::Window;
use declip_core::{FseParams, Label};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

pub const N: usize = 2048;

/// A window of a few random partials plus noise, with 1..=200 lost samples:
/// one run through the center and the rest scattered. Some support samples
/// are marked as already reconstructed.
pub fn random_window(rng: &mut ChaCha8Rng, params: &FseParams) -> Window {
    let s = params.support;
    let partials: Vec<(f64, f64, f64)> = (0..rng.gen_range(2..=8))
        .map(|_| (rng.gen_range(0.0..0.5), rng.gen_range(0.05..0.5), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let samples: Vec<f64> = (0..N)
        .map(|m| {
            if m > 2 * s {
                return 0.0;
            }
            let tone: f64 = partials
                .iter()
                .map(|(f, a, ph)| a * (2.0 * PI * f * m as f64 + ph).cos())
                .sum();
            tone + rng.gen_range(-0.01..0.01)
        })
        .collect();

    let mut labels = vec![Label::Support; N];
    for l in &mut labels[2 * s + 1..] {
        *l = Label::Lost;
    }
    let lost = rng.gen_range(1..=200usize);
    let run = rng.gen_range(1..=lost);
    let start = s - rng.gen_range(0..run);
    for l in &mut labels[start..start + run] {
        *l = Label::Lost;
    }
    for m in sample(rng, 2 * s + 1, lost - run) {
        labels[m] = Label::Lost;
    }
    let reconstructed = rng.gen_range(0..50);
    for m in sample(rng, 2 * s + 1, reconstructed) {
        if labels[m] == Label::Support {
            labels[m] = Label::Reconstructed;
        }
    }
    Window {
        center: s,
        samples,
        labels,
    }
}

/// Weights written out directly: distance decay from the center, scaled by
/// `delta` on reconstructed samples, zero on lost samples and padding.
pub fn literal_weights(labels: &[Label], params: &FseParams) -> Vec<f64> {
    let s = params.support as i64;
    labels
        .iter()
        .enumerate()
        .map(|(m, l)| {
            if m as i64 > 2 * s {
                return 0.0;
            }
            let d = params.rho.powi((m as i64 - s).abs() as i32);
            match l {
                Label::Support => d,
                Label::Reconstructed => params.delta * d,
                Label::Lost => 0.0,
            }
        })
        .collect()
}

/// `exp(2 pi i k m / n)` with the exponent reduced modulo `n`.
pub fn basis(k: usize, m: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * ((k * m) % n) as f64 / n as f64)
}

/// Weighted projection of `r` onto every basis function by explicit
/// numerator and denominator sums.
pub fn brute_projections(r: &[f64], w: &[f64]) -> Vec<Complex64> {
    let n = r.len();
    (0..n)
        .map(|k| {
            let mut num = Complex64::default();
            let mut den = Complex64::default();
            for m in 0..n {
                let phi = basis(k, m, n);
                num += r[m] * phi.conj() * w[m];
                den += phi.conj() * w[m] * phi;
            }
            num / den
        })
        .collect()
}

/// Model generation evaluated literally in the time domain. Every
/// projection is a direct sum; each candidate pair is fitted to the residual
/// by a 2x2 weighted least-squares solve on its cosine and sine, the pair
/// removing the most weighted energy is selected, and model and residual are
/// updated sample by sample.
pub struct LiteralFse {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Weighted Gram entries `(sum w cos^2, sum w sin^2, sum w cos sin)` of one
/// bin.
type Gram = (f64, f64, f64);

impl LiteralFse {
    pub fn new(n: usize) -> Self {
        let (cos, sin) = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        Self { n, cos, sin }
    }

    /// Coefficients `(x, y)` of the component `x cos + y sin` fitted for a
    /// bin with Gram entries `gram` and correlations `(src, srs)` with the
    /// residual. Bins whose cosine and sine are nearly dependent get half the
    /// plain projection on each.
    fn fit(&self, k: usize, gram: Gram, src: f64, srs: f64, sum_w: f64) -> (f64, f64) {
        let (scc, sss, scs) = gram;
        if k == 0 || 2 * k == self.n {
            return (src / scc, 0.0);
        }
        let det = scc * sss - scs * scs;
        if 4.0 * det <= 1e-10 * sum_w * sum_w {
            return (src / sum_w, srs / sum_w);
        }
        ((src * sss - srs * scs) / det, (srs * scc - src * scs) / det)
    }

    /// Model `g` over the window after each iteration count in `snapshots`
    /// (ascending), stopping early once no pair reduces the residual.
    pub fn run(&self, f: &[f64], labels: &[Label], params: &FseParams, snapshots: &[usize]) -> Vec<Vec<f64>> {
        let n = self.n;
        let mask = n - 1;
        let w = literal_weights(labels, params);
        let support: Vec<usize> = (0..n).filter(|&m| w[m] != 0.0).collect();
        let sum_w: f64 = w.iter().sum();
        let grams: Vec<Gram> = (0..=n / 2)
            .map(|k| {
                support.iter().fold((0.0, 0.0, 0.0), |(cc, ss, cs), &m| {
                    let j = (k * m) & mask;
                    let (c, s) = (self.cos[j], self.sin[j]);
                    (cc + w[m] * c * c, ss + w[m] * s * s, cs + w[m] * c * s)
                })
            })
            .collect();
        let mut r = f.to_vec();
        let mut g = vec![0.0; n];
        let mut out = Vec::new();
        let last = snapshots.last().copied().unwrap_or(0);

        for nu in 1..=last {
            let rw: Vec<(usize, f64)> = support.iter().map(|&m| (m, r[m] * w[m])).collect();
            let mut best = None;
            let mut best_gain = 0.0;
            for k in 0..=n / 2 {
                let (mut src, mut srs) = (0.0, 0.0);
                for &(m, v) in &rw {
                    let j = (k * m) & mask;
                    src += v * self.cos[j];
                    srs += v * self.sin[j];
                }
                let (scc, sss, scs) = grams[k];
                let (x, y) = self.fit(k, grams[k], src, srs, sum_w);
                let gain = 2.0 * (x * src + y * srs) - (x * x * scc + 2.0 * x * y * scs + y * y * sss);
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((k, x, y));
                }
            }
            let Some((u, x, y)) = best else {
                break;
            };
            for m in 0..n {
                let j = (u * m) & mask;
                let v = params.gamma * (x * self.cos[j] + y * self.sin[j]);
                g[m] += v;
                r[m] -= v;
            }
            if snapshots.contains(&nu) {
                out.push(g.clone());
            }
        }
        while out.len() < snapshots.len() {
            out.push(g.clone());
        }
        out
    }
}
