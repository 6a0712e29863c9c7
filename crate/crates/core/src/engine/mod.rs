//! Frequency selective extrapolation of lost samples.
//!
//! Each lost sample is estimated from a window of `2 * support + 1`
//! surrounding samples. A sparse model is grown one conjugate pair of
//! Fourier basis functions at a time: project the weighted residual onto
//! every basis function, pick the pair whose weighted least-squares fit
//! removes the most weighted energy, add a compensated multiple of that fit
//! to the model and remove it from the residual. The model value at the
//! center replaces the lost sample.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ParamsError;

mod declip;
pub mod order;
mod reference;
pub mod spectral;
mod weights;
mod window;

pub use declip::{declip, declip_with, DeclipOptions, DeclipStats, Declipped, ProcessingMode, RunStats, SampleStats};
pub use order::{processing_order, run_groups};
pub use spectral::{select_basis, FitGain, Selection, SpectralState};
pub use weights::{build_weights, decay, WeightVector};
pub use window::{
    clamp_estimate, extract_window, generate_window_model, window_weights, Window, WindowModel, WindowSolver,
};

/// Which implementation generates the window models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Explicit time-domain residual, one transform per iteration.
    Reference,
    /// Residual tracked entirely in the frequency domain.
    #[default]
    Spectral,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Reference, Engine::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Reference => "reference",
            Engine::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(Engine::Reference),
            "spectral" => Ok(Engine::Spectral),
            other => Err(format!("unknown engine {other:?} (expected reference or spectral)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("window has no support samples")]
    NoSupport,
    #[error("window length {got} does not match the transform size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("a window of 2*{support}+1 samples does not fit a transform of {fft_size}")]
    Geometry { support: usize, fft_size: usize },
    #[error("the window center is not a lost sample")]
    CenterNotLost,
}

#[derive(Debug, Error)]
pub enum DeclipError {
    #[error("signal has {signal} samples but the mask has {mask}")]
    LengthMismatch { signal: usize, mask: usize },
    #[error(transparent)]
    Params(#[from] ParamsError),
}
