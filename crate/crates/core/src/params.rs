//! Model parameters and their `key = value` configuration format.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ParamsError {
    ParamsError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Parameters of the extrapolation model.
///
/// Defaults are the values tuned for speech declipping: ODC factor 1.25,
/// decay 0.99, unit weight for reconstructed samples, 1000 support samples
/// on each side, a 2048-point transform and at most 1500 iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FseParams {
    /// Orthogonality deficiency compensation factor.
    pub gamma: f64,
    /// Decay of the isotropic weighting function.
    pub rho: f64,
    /// Extra weight applied to already reconstructed samples.
    pub delta: f64,
    /// Support samples on each side of the sample being reconstructed.
    pub support: usize,
    /// Transform size; a power of two holding the whole window.
    pub fft_size: usize,
    pub max_iter: usize,
    /// Stop once the weighted residual energy falls to this fraction of its
    /// initial value. Zero disables the check.
    pub residual_tol: f64,
    /// Clipping level; reconstructed samples are kept above it.
    pub clip_threshold: f64,
    /// Largest representable magnitude.
    pub peak: f64,
}

impl Default for FseParams {
    fn default() -> Self {
        Self {
            gamma: 1.25,
            rho: 0.99,
            delta: 1.0,
            support: 1000,
            fft_size: 2048,
            max_iter: 1500,
            residual_tol: 0.0,
            clip_threshold: 1.0,
            peak: 1.0,
        }
    }
}

impl FseParams {
    /// Same parameters with a different clipping level.
    pub fn with_threshold(mut self, clip_threshold: f64) -> Self {
        self.clip_threshold = clip_threshold;
        self
    }

    /// Number of samples in the extrapolation area, `2 * support + 1`.
    pub fn window_len(&self) -> usize {
        2 * self.support + 1
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(invalid("gamma", format!("{} not in (0, 2]", self.gamma)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(invalid("rho", format!("{} not in (0, 1)", self.rho)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(invalid("delta", format!("{} must be finite and >= 0", self.delta)));
        }
        if self.support == 0 {
            return Err(invalid("support", "must be positive"));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return Err(invalid(
                "fft_size",
                format!("{} is not a power of two >= 2", self.fft_size),
            ));
        }
        if self.fft_size < self.window_len() {
            return Err(invalid(
                "fft_size",
                format!(
                    "{} cannot hold a window of 2*{}+1 = {} samples",
                    self.fft_size,
                    self.support,
                    self.window_len()
                ),
            ));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be positive"));
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return Err(invalid(
                "residual_tol",
                format!("{} must be finite and >= 0", self.residual_tol),
            ));
        }
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return Err(invalid("peak", format!("{} must be positive", self.peak)));
        }
        if !(self.clip_threshold > 0.0 && self.clip_threshold <= 1.0) {
            return Err(invalid(
                "clip_threshold",
                format!("{} not in (0, 1]", self.clip_threshold),
            ));
        }
        if self.clip_threshold > self.peak {
            return Err(invalid(
                "clip_threshold",
                format!("{} exceeds peak {}", self.clip_threshold, self.peak),
            ));
        }
        Ok(())
    }

    /// Parses `key = value` lines. Keys left out keep their default value.
    pub fn from_config_str(text: &str) -> Result<Self, ParamsError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("flat numeric struct always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParamsError> {
        Self::from_config_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ParamsError> {
        fs::write(path, self.to_config_string())?;
        Ok(())
    }
}
