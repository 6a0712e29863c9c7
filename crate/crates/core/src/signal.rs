//! Sampled waveforms and the per-sample support/loss bookkeeping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("unknown mask label {0:?} (expected A, B or R)")]
    UnknownLabel(char),
}

/// A mono waveform with real-valued, finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, SignalError> {
        if sample_rate == 0 {
            return Err(SignalError::ZeroSampleRate);
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SignalError::NonFinite { index, value });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a signal from samples produced by an operation that cannot
    /// introduce non-finite values from finite input.
    pub(crate) fn from_finite(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        debug_assert!(sample_rate > 0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

/// Role of a sample during reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Valid, measured sample (area A).
    Support,
    /// Clipped sample awaiting reconstruction (area B).
    Lost,
    /// Sample already replaced by a model estimate (area R).
    Reconstructed,
}

impl Label {
    /// The masking function: 1 on support and reconstructed samples, 0 on lost ones.
    pub fn mask_value(self) -> f64 {
        match self {
            Label::Lost => 0.0,
            Label::Support | Label::Reconstructed => 1.0,
        }
    }

    pub fn is_lost(self) -> bool {
        self == Label::Lost
    }

    pub fn as_char(self) -> char {
        match self {
            Label::Support => 'A',
            Label::Lost => 'B',
            Label::Reconstructed => 'R',
        }
    }

    pub fn from_char(c: char) -> Result<Self, SignalError> {
        match c {
            'A' => Ok(Label::Support),
            'B' => Ok(Label::Lost),
            'R' => Ok(Label::Reconstructed),
            other => Err(SignalError::UnknownLabel(other)),
        }
    }
}

/// A maximal block of consecutive lost samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Run {
    pub start: usize,
    pub len: usize,
}

impl Run {
    /// One past the last index of the run.
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// One label per sample of a companion [`AudioSignal`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SampleMask {
    labels: Vec<Label>,
}

impl SampleMask {
    pub fn new(labels: Vec<Label>) -> Self {
        Self { labels }
    }

    pub fn all_support(len: usize) -> Self {
        Self {
            labels: vec![Label::Support; len],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<Label> {
        self.labels.get(index).copied()
    }

    pub fn set(&mut self, index: usize, label: Label) {
        self.labels[index] = label;
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn lost_count(&self) -> usize {
        self.count(Label::Lost)
    }

    pub fn lost_indices(&self) -> Vec<usize> {
        self.indices_where(Label::is_lost)
    }

    pub fn indices_where(&self, pred: impl Fn(Label) -> bool) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| pred(l))
            .map(|(i, _)| i)
            .collect()
    }

    /// The masking function b[n] as a sequence of 0/1 values.
    pub fn mask_values(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.mask_value()).collect()
    }

    /// Maximal runs of lost samples in ascending position order.
    pub fn lost_runs(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < self.labels.len() {
            if self.labels[i].is_lost() {
                let start = i;
                while i < self.labels.len() && self.labels[i].is_lost() {
                    i += 1;
                }
                runs.push(Run {
                    start,
                    len: i - start,
                });
            } else {
                i += 1;
            }
        }
        runs
    }
}

impl fmt::Display for SampleMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.labels
            .iter()
            .try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

impl FromStr for SampleMask {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(Label::from_char)
            .collect::<Result<Vec<_>, _>>()
            .map(SampleMask::new)
    }
}
