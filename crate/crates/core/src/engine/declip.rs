//! Whole-signal reconstruction.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::order::{ordered_runs, outside_in, run_groups};
use crate::engine::window::{clamp_estimate, extract_window, WindowSolver};
use crate::engine::{DeclipError, Engine, WindowError};
use crate::params::FseParams;
use crate::signal::{AudioSignal, Label, Run, SampleMask};

/// How lost samples are mapped onto window models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessingMode {
    /// One model per lost sample, each centered on that sample.
    #[default]
    SampleWise,
    /// One model per run of lost samples (or per window-sized chunk of a
    /// longer run), centered on the run. Much faster, usually less accurate.
    RunWise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeclipOptions {
    pub engine: Engine,
    pub mode: ProcessingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub index: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub start: usize,
    pub len: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DeclipStats {
    pub engine: String,
    pub reconstructed: usize,
    /// Lost samples left untouched because their window had no support.
    pub skipped: Vec<usize>,
    pub total_iterations: u64,
    pub samples: Vec<SampleStats>,
    pub runs: Vec<RunStats>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declipped {
    pub signal: AudioSignal,
    /// Final labels: reconstructed samples are `R`, skipped ones stay `B`.
    pub mask: SampleMask,
    pub stats: DeclipStats,
}

pub fn declip(f: &AudioSignal, mask: &SampleMask, params: &FseParams, engine: Engine) -> Result<Declipped, DeclipError> {
    declip_with(
        f,
        mask,
        params,
        &DeclipOptions {
            engine,
            ..Default::default()
        },
    )
}

/// Replaces every lost sample by its clamped model estimate, keeping all
/// other samples untouched.
///
/// Runs too far apart to share a window are reconstructed in parallel on the
/// current rayon pool; the result does not depend on the number of workers.
pub fn declip_with(
    f: &AudioSignal,
    mask: &SampleMask,
    params: &FseParams,
    options: &DeclipOptions,
) -> Result<Declipped, DeclipError> {
    if mask.len() != f.len() {
        return Err(DeclipError::LengthMismatch {
            signal: f.len(),
            mask: mask.len(),
        });
    }
    params.validate()?;
    let start = Instant::now();

    let groups = run_groups(mask, params.support);
    let outcomes: Vec<GroupOutcome> = groups
        .par_iter()
        .map_init(
            || WindowSolver::new(*params, options.engine),
            |solver, runs| reconstruct_group(solver, f.samples(), mask.labels(), runs, options.mode),
        )
        .collect();

    let mut samples = f.samples().to_vec();
    let mut labels = mask.labels().to_vec();
    let mut stats = DeclipStats {
        engine: options.engine.to_string(),
        ..Default::default()
    };
    for outcome in outcomes {
        for (i, v) in outcome.writes {
            samples[i] = v;
            labels[i] = Label::Reconstructed;
        }
        stats.total_iterations += outcome.samples.iter().map(|s| s.iterations as u64).sum::<u64>();
        stats.reconstructed += outcome.samples.len();
        stats.samples.extend(outcome.samples);
        stats.skipped.extend(outcome.skipped);
        stats.runs.extend(outcome.runs);
    }
    stats.seconds = start.elapsed().as_secs_f64();

    Ok(Declipped {
        signal: AudioSignal::from_finite(samples, f.sample_rate()),
        mask: SampleMask::new(labels),
        stats,
    })
}

#[derive(Default)]
struct GroupOutcome {
    writes: Vec<(usize, f64)>,
    samples: Vec<SampleStats>,
    skipped: Vec<usize>,
    runs: Vec<RunStats>,
}

/// Works on a private copy of the stretch of signal the group's windows can
/// reach, so groups never observe each other's writes.
fn reconstruct_group(
    solver: &mut WindowSolver,
    samples: &[f64],
    labels: &[Label],
    runs: &[Run],
    mode: ProcessingMode,
) -> GroupOutcome {
    let support = solver.params().support;
    let lo = runs[0].start.saturating_sub(support);
    let hi = (runs[runs.len() - 1].end() + support).min(samples.len());
    let mut local = Region {
        lo,
        samples: samples[lo..hi].to_vec(),
        labels: labels[lo..hi].to_vec(),
    };
    let mut outcome = GroupOutcome::default();
    for run in ordered_runs(runs.to_vec()) {
        let t = Instant::now();
        match mode {
            ProcessingMode::SampleWise => {
                for i in outside_in(run) {
                    local.reconstruct(solver, &[i], i, &mut outcome);
                }
            }
            ProcessingMode::RunWise => {
                let chunk = solver.params().window_len();
                let idx: Vec<usize> = (run.start..run.end()).collect();
                for part in idx.chunks(chunk) {
                    local.reconstruct(solver, part, part[part.len() / 2], &mut outcome);
                }
            }
        }
        outcome.runs.push(RunStats {
            start: run.start,
            len: run.len,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    outcome
}

struct Region {
    lo: usize,
    samples: Vec<f64>,
    labels: Vec<Label>,
}

impl Region {
    /// Builds one model centered on `center` and writes its clamped estimate
    /// at every index in `targets` (absolute positions).
    fn reconstruct(&mut self, solver: &mut WindowSolver, targets: &[usize], center: usize, out: &mut GroupOutcome) {
        let params = *solver.params();
        let mut window = extract_window(&self.samples, &self.labels, center - self.lo, &params);
        window.center = center;
        match solver.solve(&window) {
            Ok(model) => {
                for &i in targets {
                    let local = i - self.lo;
                    let offset = params.support + i - center;
                    let g = model.evaluate(offset).re;
                    let v = clamp_estimate(g, self.samples[local], &params);
                    self.samples[local] = v;
                    self.labels[local] = Label::Reconstructed;
                    out.writes.push((i, v));
                    out.samples.push(SampleStats {
                        index: i,
                        iterations: model.iterations_used,
                        converged: model.converged,
                    });
                }
            }
            Err(WindowError::NoSupport) => out.skipped.extend_from_slice(targets),
            Err(e) => unreachable!("window geometry is validated up front: {e}"),
        }
    }
}
