//! Reconstruction quality on clipped positions and the clip-level sweep.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::clipping::{detect_clipped, hard_clip, ClipSpec};
use crate::engine::{declip_with, DeclipOptions, Engine, ProcessingMode};
use crate::params::FseParams;
use crate::signal::{AudioSignal, SampleMask};

/// Value reported when the reference has no energy on the clipped positions.
pub const SNR_FLOOR_DB: f64 = -99.0;

/// Engine id of the rows that score the clipped input itself.
pub const BASELINE_ENGINE: &str = "clipped";

/// Signal id of the per-threshold averages in multi-signal reports.
pub const MEAN_SIGNAL: &str = "mean";

pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("signals differ in length ({reference} vs {processed}) or from the mask ({mask})")]
    LengthMismatch {
        reference: usize,
        processed: usize,
        mask: usize,
    },
    #[error("metric undefined: no clipped positions")]
    Undefined,
    #[error("reports do not cover the same cells")]
    MismatchedCells,
    #[error("cell {signal} at {theta_c} has no finite SNR")]
    NonFinite { signal: String, theta_c: f64 },
}

/// SNR on the clipped positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrValue {
    Db(f64),
    /// Zero error energy.
    Exact,
}

impl SnrValue {
    pub fn db(self) -> Option<f64> {
        match self {
            SnrValue::Db(v) => Some(v),
            SnrValue::Exact => None,
        }
    }
}

impl fmt::Display for SnrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnrValue::Db(v) => write!(f, "{v:.2} dB"),
            SnrValue::Exact => f.write_str("exact"),
        }
    }
}

/// `10 log10(sum s^2 / sum (s - s_hat)^2)` over the positions `mask` labels
/// lost. Pass the mask as detected, before reconstruction relabels samples.
pub fn snr_miss(s: &AudioSignal, s_hat: &AudioSignal, mask: &SampleMask) -> Result<SnrValue, EvalError> {
    if s.len() != s_hat.len() || s.len() != mask.len() {
        return Err(EvalError::LengthMismatch {
            reference: s.len(),
            processed: s_hat.len(),
            mask: mask.len(),
        });
    }
    let (mut signal, mut error, mut count) = (0.0, 0.0, 0usize);
    for ((a, b), l) in s.samples().iter().zip(s_hat.samples()).zip(mask.labels()) {
        if l.is_lost() {
            signal += a * a;
            error += (a - b) * (a - b);
            count += 1;
        }
    }
    if count == 0 {
        return Err(EvalError::Undefined);
    }
    if error == 0.0 {
        return Ok(SnrValue::Exact);
    }
    if signal == 0.0 {
        return Ok(SnrValue::Db(SNR_FLOOR_DB));
    }
    Ok(SnrValue::Db((10.0 * (signal / error).log10()).max(SNR_FLOOR_DB)))
}

/// Clip levels, engines and model parameters of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub thresholds: Vec<f64>,
    pub engines: Vec<Engine>,
    pub params: FseParams,
    pub mode: ProcessingMode,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            engines: vec![Engine::Spectral],
            params: FseParams::default(),
            mode: ProcessingMode::SampleWise,
        }
    }
}

/// Outcome of one report cell.
#[derive(Debug, Clone, PartialEq)]
pub enum SnrCell {
    Db(f64),
    Exact,
    Failed(String),
}

impl From<SnrValue> for SnrCell {
    fn from(v: SnrValue) -> Self {
        match v {
            SnrValue::Db(v) => SnrCell::Db(v),
            SnrValue::Exact => SnrCell::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub signal: String,
    pub theta_c: f64,
    pub engine: String,
    pub snr: SnrCell,
    pub clipped: usize,
    pub seconds: f64,
}

impl ReportEntry {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.signal
            .cmp(&other.signal)
            .then(self.theta_c.total_cmp(&other.theta_c))
            .then(self.engine.cmp(&other.engine))
    }
}

/// Serialization options for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportFormat {
    /// Emit wall times. Off by default: timings differ between runs, and
    /// without them reports are reproducible byte for byte.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnrReport {
    pub entries: Vec<ReportEntry>,
}

#[derive(Serialize)]
struct EntryView<'a> {
    signal: &'a str,
    theta_c: f64,
    engine: &'a str,
    snr_db: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    clipped: usize,
    seconds: Option<f64>,
}

#[derive(Serialize)]
struct ReportView<'a> {
    entries: Vec<EntryView<'a>>,
}

impl SnrReport {
    /// Rows sorted by signal, clip level and engine.
    pub fn sorted(mut self) -> Self {
        self.entries.sort_by(ReportEntry::key_cmp);
        self
    }

    pub fn extend(&mut self, other: SnrReport) {
        self.entries.extend(other.entries);
    }

    pub fn for_engine(&self, engine: &str) -> SnrReport {
        SnrReport {
            entries: self.entries.iter().filter(|e| e.engine == engine).cloned().collect(),
        }
    }

    /// Per clip level and engine, the dB-domain mean over signals. Exact and
    /// failed cells are left out of the mean.
    pub fn mean_by_threshold(&self) -> SnrReport {
        let mut cells: BTreeMap<(u64, &str), Vec<&ReportEntry>> = BTreeMap::new();
        for e in self.entries.iter().filter(|e| e.signal != MEAN_SIGNAL) {
            cells.entry((e.theta_c.to_bits(), e.engine.as_str())).or_default().push(e);
        }
        let entries = cells
            .into_iter()
            .map(|((theta, engine), rows)| {
                let finite: Vec<f64> = rows
                    .iter()
                    .filter_map(|e| match e.snr {
                        SnrCell::Db(v) => Some(v),
                        _ => None,
                    })
                    .collect();
                let snr = if finite.is_empty() {
                    SnrCell::Failed("no finite cells to average".into())
                } else {
                    SnrCell::Db(finite.iter().sum::<f64>() / finite.len() as f64)
                };
                ReportEntry {
                    signal: MEAN_SIGNAL.into(),
                    theta_c: f64::from_bits(theta),
                    engine: engine.into(),
                    snr,
                    clipped: rows.iter().map(|e| e.clipped).sum(),
                    seconds: rows.iter().map(|e| e.seconds).sum(),
                }
            })
            .collect();
        SnrReport { entries }.sorted()
    }

    pub fn to_csv(&self, format: ReportFormat) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["signal", "theta_c", "engine", "snr_db", "clipped", "seconds"])
            .expect("in-memory write");
        for e in &self.entries {
            let snr = match &e.snr {
                SnrCell::Db(v) => format!("{v:.6}"),
                SnrCell::Exact => "exact".into(),
                SnrCell::Failed(_) => "failed".into(),
            };
            let seconds = if format.timing {
                format!("{:.6}", e.seconds)
            } else {
                String::new()
            };
            w.write_record([
                e.signal.as_str(),
                &e.theta_c.to_string(),
                &e.engine,
                &snr,
                &e.clipped.to_string(),
                &seconds,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
    }

    pub fn to_json(&self, format: ReportFormat) -> String {
        let view = ReportView {
            entries: self
                .entries
                .iter()
                .map(|e| EntryView {
                    signal: &e.signal,
                    theta_c: e.theta_c,
                    engine: &e.engine,
                    snr_db: match &e.snr {
                        SnrCell::Db(v) => serde_json::json!(v),
                        SnrCell::Exact => serde_json::json!("exact"),
                        SnrCell::Failed(_) => serde_json::Value::Null,
                    },
                    error: match &e.snr {
                        SnrCell::Failed(msg) => Some(msg.as_str()),
                        _ => None,
                    },
                    clipped: e.clipped,
                    seconds: format.timing.then_some(e.seconds),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&view).expect("plain data serializes")
    }
}

/// Declipped output of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub theta_c: f64,
    pub engine: Engine,
    pub signal: AudioSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub report: SnrReport,
    pub outputs: Vec<SweepOutput>,
}

/// Clips `clean` at every level, reconstructs with every engine and scores
/// both the clipped input and each reconstruction.
pub fn run_sweep(id: &str, clean: &AudioSignal, spec: &SweepSpec) -> SnrReport {
    run_sweep_detailed(id, clean, spec).report
}

pub fn run_sweep_detailed(id: &str, clean: &AudioSignal, spec: &SweepSpec) -> SweepOutcome {
    let cells: Vec<(f64, Option<Engine>)> = spec
        .thresholds
        .iter()
        .flat_map(|&t| std::iter::once((t, None)).chain(spec.engines.iter().map(move |&e| (t, Some(e)))))
        .collect();

    let results: Vec<(ReportEntry, Option<SweepOutput>)> = cells
        .par_iter()
        .map(|&(theta, engine)| run_cell(id, clean, theta, engine, spec))
        .collect();

    let mut report = SnrReport::default();
    let mut outputs = Vec::new();
    for (entry, output) in results {
        report.entries.push(entry);
        outputs.extend(output);
    }
    outputs.sort_by(|a, b| a.theta_c.total_cmp(&b.theta_c).then(a.engine.as_str().cmp(b.engine.as_str())));
    SweepOutcome {
        report: report.sorted(),
        outputs,
    }
}

fn run_cell(
    id: &str,
    clean: &AudioSignal,
    theta: f64,
    engine: Option<Engine>,
    spec: &SweepSpec,
) -> (ReportEntry, Option<SweepOutput>) {
    let mut entry = ReportEntry {
        signal: id.to_string(),
        theta_c: theta,
        engine: engine.map_or(BASELINE_ENGINE.to_string(), |e| e.to_string()),
        snr: SnrCell::Failed(String::new()),
        clipped: 0,
        seconds: 0.0,
    };
    let clip_spec = match ClipSpec::exact(theta) {
        Ok(c) => c,
        Err(e) => {
            entry.snr = SnrCell::Failed(e.to_string());
            return (entry, None);
        }
    };
    let clipped = hard_clip(clean, theta).expect("threshold validated by ClipSpec");
    let mask = detect_clipped(&clipped, &clip_spec);
    entry.clipped = mask.lost_count();

    let Some(engine) = engine else {
        entry.snr = cell(snr_miss(clean, &clipped, &mask));
        return (entry, None);
    };
    let params = spec.params.with_threshold(theta);
    let options = DeclipOptions { engine, mode: spec.mode };
    match declip_with(&clipped, &mask, &params, &options) {
        Ok(out) => {
            entry.seconds = out.stats.seconds;
            entry.snr = cell(snr_miss(clean, &out.signal, &mask));
            let output = SweepOutput {
                theta_c: theta,
                engine,
                signal: out.signal,
            };
            (entry, Some(output))
        }
        Err(e) => {
            entry.snr = SnrCell::Failed(e.to_string());
            (entry, None)
        }
    }
}

fn cell(v: Result<SnrValue, EvalError>) -> SnrCell {
    match v {
        Ok(v) => v.into(),
        Err(e) => SnrCell::Failed(e.to_string()),
    }
}

/// Mean over matching (signal, clip level) cells of `a - b` in dB. Each
/// report must hold exactly one row per cell, e.g. via
/// [`SnrReport::for_engine`].
pub fn average_gain(a: &SnrReport, b: &SnrReport) -> Result<f64, EvalError> {
    fn cells(r: &SnrReport) -> Result<BTreeMap<(&str, u64), f64>, EvalError> {
        let mut map = BTreeMap::new();
        for e in &r.entries {
            let SnrCell::Db(v) = e.snr else {
                return Err(EvalError::NonFinite {
                    signal: e.signal.clone(),
                    theta_c: e.theta_c,
                });
            };
            if map.insert((e.signal.as_str(), e.theta_c.to_bits()), v).is_some() {
                return Err(EvalError::MismatchedCells);
            }
        }
        Ok(map)
    }
    let (ca, cb) = (cells(a)?, cells(b)?);
    if ca.is_empty() || ca.len() != cb.len() || !ca.keys().eq(cb.keys()) {
        return Err(EvalError::MismatchedCells);
    }
    let total: f64 = ca.values().zip(cb.values()).map(|(x, y)| x - y).sum();
    Ok(total / ca.len() as f64)
}
