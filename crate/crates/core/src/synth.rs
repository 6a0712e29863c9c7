//! Deterministic test signals.

use std::f64::consts::PI;

use crate::clipping::normalize_peak;
use crate::signal::AudioSignal;

/// `amplitude * cos(2 pi cycles_per_sample n + phase)`.
pub fn sinusoid(len: usize, sample_rate: u32, cycles_per_sample: f64, amplitude: f64, phase: f64) -> AudioSignal {
    let samples = (0..len)
        .map(|n| amplitude * (2.0 * PI * cycles_per_sample * n as f64 + phase).cos())
        .collect();
    AudioSignal::new(samples, sample_rate).expect("finite by construction")
}

/// Unit-amplitude sinusoid completing exactly `bin` cycles every `fft_size`
/// samples.
pub fn on_bin_sinusoid(len: usize, sample_rate: u32, bin: usize, fft_size: usize) -> AudioSignal {
    sinusoid(len, sample_rate, bin as f64 / fft_size as f64, 1.0, 0.0)
}

/// Voiced-speech stand-in: five harmonics of a 140 Hz fundamental with slow
/// vibrato, under a 4 Hz syllable envelope. Peak-normalized.
pub fn harmonic_speech(len: usize, sample_rate: u32) -> AudioSignal {
    const AMPS: [f64; 5] = [1.0, 0.65, 0.45, 0.3, 0.2];
    const PHASES: [f64; 5] = [0.0, 0.7, 1.9, 2.6, 4.1];
    let fs = f64::from(sample_rate);
    let mut phase = 0.0;
    let samples: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            let f0 = 140.0 + 6.0 * (2.0 * PI * 5.0 * t).sin();
            phase += 2.0 * PI * f0 / fs;
            let voiced: f64 = AMPS
                .iter()
                .zip(PHASES)
                .enumerate()
                .map(|(h, (a, p))| a * ((h + 1) as f64 * phase + p).sin())
                .sum();
            let syllable = (PI * 4.0 * t).sin().powi(2);
            voiced * (0.25 + 0.75 * syllable)
        })
        .collect();
    normalize_peak(&AudioSignal::new(samples, sample_rate).expect("finite by construction"))
        .expect("non-silent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speech_stand_in_is_unit_peak() {
        let s = harmonic_speech(16000, 16000);
        let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(peak, 1.0);
        assert_eq!(s.len(), 16000);
    }

    #[test]
    fn on_bin_period() {
        let s = on_bin_sinusoid(4096, 16000, 64, 2048);
        assert!((s.samples()[32] - 1.0).abs() < 1e-12);
        assert!((s.samples()[16] + 1.0).abs() < 1e-12);
    }
}
