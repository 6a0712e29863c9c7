//! Reconstruction of hard-clipped audio by frequency selective extrapolation.
//!
//! Clipped samples are treated as lost and re-estimated, one at a time, from
//! a sparse Fourier model fitted to the surrounding valid samples. The crate
//! also provides the clipping/detection helpers, the SNR metric restricted to
//! clipped positions, a clip-level sweep harness and wav I/O.
//!
//! ```no_run
//! use declip_core::{clipping, engine, eval, FseParams};
//!
//! let (channels, _) = declip_core::wav::read_wav("speech.wav").unwrap();
//! let clean = clipping::normalize_peak(&channels[0]).unwrap();
//! let clipped = clipping::hard_clip(&clean, 0.6).unwrap();
//! let mask = clipping::detect_clipped(&clipped, &clipping::ClipSpec::exact(0.6).unwrap());
//! let params = FseParams::default().with_threshold(0.6);
//! let out = engine::declip(&clipped, &mask, &params, engine::Engine::Spectral).unwrap();
//! println!("{}", eval::snr_miss(&clean, &out.signal, &mask).unwrap());
//! ```

pub mod clipping;
pub mod engine;
pub mod eval;
pub mod params;
pub mod signal;
pub mod synth;
pub mod wav;

pub use engine::{declip, Declipped, Engine};
pub use eval::{snr_miss, SnrReport, SnrValue};
pub use params::FseParams;
pub use signal::{AudioSignal, Label, SampleMask};
