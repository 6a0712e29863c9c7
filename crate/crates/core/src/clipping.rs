//! Peak normalization, artificial hard clipping and clipped-sample detection.

use thiserror::Error;

use crate::signal::{AudioSignal, Label, SampleMask};

#[derive(Debug, Error, PartialEq)]
pub enum ClipError {
    #[error("signal is silent; there is no peak to normalize")]
    Silent,
    #[error("signal is empty")]
    Empty,
    #[error("clipping threshold {0} must be positive and finite")]
    InvalidThreshold(f64),
    #[error("detection tolerance {tolerance} must be >= 0 and below the threshold {threshold}")]
    InvalidTolerance { threshold: f64, tolerance: f64 },
}

/// Clipping level as seen by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipSpec {
    threshold: f64,
    detect_tolerance: f64,
}

impl ClipSpec {
    pub fn new(threshold: f64, detect_tolerance: f64) -> Result<Self, ClipError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(ClipError::InvalidThreshold(threshold));
        }
        if !(detect_tolerance >= 0.0 && threshold - detect_tolerance > 0.0) {
            return Err(ClipError::InvalidTolerance {
                threshold,
                tolerance: detect_tolerance,
            });
        }
        Ok(Self {
            threshold,
            detect_tolerance,
        })
    }

    /// Exact detection, for floating-point pipelines.
    pub fn exact(threshold: f64) -> Result<Self, ClipError> {
        Self::new(threshold, 0.0)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn detect_tolerance(&self) -> f64 {
        self.detect_tolerance
    }
}

/// Scales the signal so that its largest magnitude is exactly 1.
pub fn normalize_peak(x: &AudioSignal) -> Result<AudioSignal, ClipError> {
    let peak = x.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(ClipError::Silent);
    }
    let samples = x.samples().iter().map(|v| v / peak).collect();
    Ok(AudioSignal::from_finite(samples, x.sample_rate()))
}

/// Maps every sample beyond `±theta` onto the rail.
pub fn hard_clip(x: &AudioSignal, theta: f64) -> Result<AudioSignal, ClipError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ClipError::InvalidThreshold(theta));
    }
    let samples = x.samples().iter().map(|v| v.clamp(-theta, theta)).collect();
    Ok(AudioSignal::from_finite(samples, x.sample_rate()))
}

/// Marks every sample at or beyond `threshold - tolerance` as lost.
pub fn detect_clipped(f: &AudioSignal, spec: &ClipSpec) -> SampleMask {
    let level = spec.threshold - spec.detect_tolerance;
    SampleMask::new(
        f.samples()
            .iter()
            .map(|v| {
                if v.abs() >= level {
                    Label::Lost
                } else {
                    Label::Support
                }
            })
            .collect(),
    )
}

/// Tightest clipping level consistent with the data: the largest magnitude.
pub fn estimate_threshold(f: &AudioSignal) -> Result<f64, ClipError> {
    if f.is_empty() {
        return Err(ClipError::Empty);
    }
    Ok(f.samples().iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
