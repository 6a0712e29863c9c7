//! `declip`: clip, declip, score and sweep WAV files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use declip_core::clipping::{detect_clipped, estimate_threshold, hard_clip, ClipError, ClipSpec};
use declip_core::engine::{declip_with, DeclipError, DeclipOptions, ProcessingMode};
use declip_core::eval::{run_sweep_detailed, EvalError, ReportEntry, ReportFormat, SnrCell, SnrReport, SweepSpec};
use declip_core::params::ParamsError;
use declip_core::wav::{read_wav, write_wav, Encoding, WavDescriptor, WavError};
use declip_core::{snr_miss, AudioSignal, Engine, FseParams, SnrValue};
use log::{info, warn};

#[derive(Parser)]
#[command(name = "declip", version, about = "Declipping of hard-clipped audio by frequency selective extrapolation")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize to unit peak and hard-clip at a threshold.
    Clip {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        theta: f64,
    },
    /// Reconstruct the clipped samples of a recording.
    Declip(DeclipArgs),
    /// SNR on the clipped positions of `processed` against `clean`.
    Eval {
        clean: PathBuf,
        processed: PathBuf,
        /// Clip level that defines the scored positions.
        #[arg(long)]
        theta: f64,
    },
    /// Clip, declip and score a file or every WAV file of a directory.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DeclipArgs {
    input: PathBuf,
    output: PathBuf,
    /// Clipping level, or `auto` to take the largest magnitude per channel.
    #[arg(long, default_value = "auto")]
    theta: Theta,
    #[arg(long, value_enum, default_value_t = EngineArg::Spectral)]
    engine: EngineArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Sample)]
    mode: ModeArg,
    /// Model parameters (`key = value` lines); unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Samples within this distance of the clipping level count as clipped
    /// (default: 2 LSB for 16-bit input, 0 for float input).
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// A WAV file or a directory of them.
    input: PathBuf,
    /// Report path; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated clip levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.6, 0.7, 0.8, 0.9])]
    thresholds: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EngineArg::Spectral])]
    engines: Vec<EngineArg>,
    #[arg(long, value_enum, default_value_t = ModeArg::Sample)]
    mode: ModeArg,
    /// Include wall times in the report.
    #[arg(long)]
    timing: bool,
    /// Also write every declipped signal here.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Spectral,
    Reference,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Spectral => Engine::Spectral,
            EngineArg::Reference => Engine::Reference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// One model per clipped sample.
    Sample,
    /// One model per clipped run (faster, coarser).
    Run,
}

impl From<ModeArg> for ProcessingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sample => ProcessingMode::SampleWise,
            ModeArg::Run => ProcessingMode::RunWise,
        }
    }
}

#[derive(Clone, Copy)]
enum Theta {
    Auto,
    Value(f64),
}

impl FromStr for Theta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Theta::Auto);
        }
        s.parse()
            .map(Theta::Value)
            .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
    }
}

enum Failure {
    Usage(String),
    Io(String),
    Processing(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Processing(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Processing(m) => f.write_str(m),
        }
    }
}

fn wav_failure(path: &Path, e: WavError) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

impl From<ParamsError> for Failure {
    fn from(e: ParamsError) -> Self {
        match e {
            ParamsError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ClipError> for Failure {
    fn from(e: ClipError) -> Self {
        match e {
            ClipError::InvalidThreshold(_) | ClipError::InvalidTolerance { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Processing(e.to_string()),
        }
    }
}

impl From<DeclipError> for Failure {
    fn from(e: DeclipError) -> Self {
        match e {
            DeclipError::Params(p) => p.into(),
            other => Failure::Processing(other.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::Processing(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Clip { input, output, theta } => cmd_clip(&input, &output, theta),
        Command::Declip(args) => cmd_declip(&args),
        Command::Eval { clean, processed, theta } => cmd_eval(&clean, &processed, theta),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load_params(config: Option<&Path>) -> Result<FseParams, Failure> {
    let params = match config {
        Some(path) => FseParams::load(path)?,
        None => FseParams::default(),
    };
    params.validate()?;
    Ok(params)
}

fn read(path: &Path) -> Result<(Vec<AudioSignal>, WavDescriptor), Failure> {
    read_wav(path).map_err(|e| wav_failure(path, e))
}

fn write(path: &Path, signals: &[AudioSignal], desc: &WavDescriptor) -> Result<(), Failure> {
    write_wav(signals, desc, path).map_err(|e| wav_failure(path, e))
}

/// Scales all channels by one factor so the loudest sample has magnitude 1.
fn normalize_jointly(channels: &[AudioSignal]) -> Result<Vec<AudioSignal>, Failure> {
    let peak = channels
        .iter()
        .flat_map(|c| c.samples())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(ClipError::Silent.into());
    }
    Ok(channels
        .iter()
        .map(|c| {
            let scaled = c.samples().iter().map(|v| v / peak).collect();
            AudioSignal::new(scaled, c.sample_rate()).expect("finite input scaled by a positive peak")
        })
        .collect())
}

fn cmd_clip(input: &Path, output: &Path, theta: f64) -> Result<(), Failure> {
    let spec = ClipSpec::exact(theta)?;
    let (channels, desc) = read(input)?;
    let clean = normalize_jointly(&channels)?;
    let mut clipped = Vec::with_capacity(clean.len());
    let mut count = 0;
    for c in &clean {
        let f = hard_clip(c, spec.threshold())?;
        count += c.samples().iter().zip(f.samples()).filter(|(a, b)| a != b).count();
        clipped.push(f);
    }
    write(output, &clipped, &desc)?;
    let total = desc.frames * clipped.len();
    println!(
        "clipped {count} of {total} samples ({:.1}%) at theta {theta}",
        percent(count, total)
    );
    Ok(())
}

fn percent(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

fn cmd_declip(args: &DeclipArgs) -> Result<(), Failure> {
    let params = load_params(args.config.as_deref())?;
    if let Theta::Value(t) = args.theta {
        ClipSpec::exact(t)?;
    }
    let (channels, desc) = read(&args.input)?;
    let tolerance = args.tolerance.unwrap_or(match desc.encoding {
        Encoding::Pcm16 => 2.0 / 32768.0,
        Encoding::Float32 => 0.0,
    });
    let options = DeclipOptions {
        engine: args.engine.into(),
        mode: args.mode.into(),
    };

    let mut jobs = Vec::with_capacity(channels.len());
    for (ch, f) in channels.iter().enumerate() {
        let theta = match args.theta {
            Theta::Value(t) => t,
            Theta::Auto => match estimate_threshold(f) {
                Ok(t) if t <= 1.0 => t,
                Ok(t) => return Err(Failure::Processing(format!("channel {ch} exceeds full scale (peak {t})"))),
                Err(ClipError::Silent) => {
                    jobs.push(None);
                    continue;
                }
                Err(e) => return Err(e.into()),
            },
        };
        let tol = tolerance.min(theta / 2.0);
        let mask = detect_clipped(f, &ClipSpec::new(theta, tol)?);
        info!("channel {ch}: theta {theta}, {} clipped samples", mask.lost_count());
        jobs.push((mask.lost_count() > 0).then_some((theta, mask)));
    }

    if jobs.iter().all(Option::is_none) {
        println!("no clipped samples found; output is a copy of the input");
        fs::copy(&args.input, &args.output).map_err(|e| Failure::Io(format!("{}: {e}", args.output.display())))?;
        return Ok(());
    }

    let mut restored = Vec::with_capacity(channels.len());
    for (ch, (f, job)) in channels.iter().zip(jobs).enumerate() {
        let Some((theta, mask)) = job else {
            restored.push(f.clone());
            continue;
        };
        let out = declip_with(f, &mask, &params.with_threshold(theta), &options)?;
        let s = &out.stats;
        println!(
            "channel {ch}: reconstructed {} of {} samples at theta {theta:.4} ({} iterations, {:.2} s, {} engine)",
            s.reconstructed,
            f.len(),
            s.total_iterations,
            s.seconds,
            s.engine
        );
        if !s.skipped.is_empty() {
            warn!("channel {ch}: {} samples had no support and were left as is", s.skipped.len());
        }
        restored.push(out.signal);
    }
    write(&args.output, &restored, &desc)
}

fn cmd_eval(clean: &Path, processed: &Path, theta: f64) -> Result<(), Failure> {
    let spec = ClipSpec::exact(theta)?;
    let (clean_ch, _) = read(clean)?;
    let (proc_ch, _) = read(processed)?;
    if clean_ch.len() != proc_ch.len() {
        return Err(Failure::Processing(format!(
            "channel counts differ ({} vs {})",
            clean_ch.len(),
            proc_ch.len()
        )));
    }
    for (ch, (s, s_hat)) in clean_ch.iter().zip(&proc_ch).enumerate() {
        let mask = detect_clipped(&hard_clip(s, theta)?, &spec);
        let value = match snr_miss(s, s_hat, &mask)? {
            SnrValue::Db(v) => format!("{v:.4} dB"),
            SnrValue::Exact => "exact".to_string(),
        };
        println!("channel {ch}: SNR_miss {value} over {} clipped samples", mask.lost_count());
    }
    Ok(())
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", dir.display()));
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let is_wav = path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
        if path.is_file() && is_wav {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn signal_id(path: &Path, channel: usize, channels: usize) -> String {
    let stem = path.file_stem().map_or_else(|| "signal".into(), |s| s.to_string_lossy().into_owned());
    if channels == 1 {
        stem
    } else {
        format!("{stem}:{channel}")
    }
}

fn failed_rows(id: &str, spec: &SweepSpec, reason: &str) -> SnrReport {
    let engines = std::iter::once(declip_core::eval::BASELINE_ENGINE.to_string())
        .chain(spec.engines.iter().map(|e| e.to_string()));
    let entries = engines
        .flat_map(|engine| {
            spec.thresholds.iter().map(move |&theta_c| ReportEntry {
                signal: id.to_string(),
                theta_c,
                engine: engine.clone(),
                snr: SnrCell::Failed(reason.to_string()),
                clipped: 0,
                seconds: 0.0,
            })
        })
        .collect();
    SnrReport { entries }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let params = load_params(args.config.as_deref())?;
    for &t in &args.thresholds {
        ClipSpec::exact(t)?;
    }
    let spec = SweepSpec {
        thresholds: args.thresholds.clone(),
        engines: args.engines.iter().map(|&e| e.into()).collect(),
        params,
        mode: args.mode.into(),
    };
    let directory = args.input.is_dir();
    let files = if directory {
        wav_files(&args.input)?
    } else {
        vec![args.input.clone()]
    };
    if files.is_empty() {
        return Err(Failure::Io(format!("no .wav files in {}", args.input.display())));
    }
    if let Some(dir) = &args.save_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }

    let mut report = SnrReport::default();
    for path in &files {
        let loaded = read(path).and_then(|(ch, desc)| Ok((normalize_jointly(&ch)?, desc)));
        let (channels, desc) = match loaded {
            Ok(v) => v,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                report.extend(failed_rows(&signal_id(path, 0, 1), &spec, &e.to_string()));
                continue;
            }
        };
        for (ch, clean) in channels.iter().enumerate() {
            let id = signal_id(path, ch, channels.len());
            info!("sweeping {id}");
            let outcome = run_sweep_detailed(&id, clean, &spec);
            if let Some(dir) = &args.save_dir {
                for out in &outcome.outputs {
                    let name = format!("{id}_{}_{}.wav", out.theta_c, out.engine).replace(':', "_ch");
                    let signals = [out.signal.clone()];
                    let one = WavDescriptor { channels: 1, ..desc };
                    write(&dir.join(name), &signals, &one)?;
                }
            }
            report.extend(outcome.report);
        }
    }
    if directory {
        let means = report.mean_by_threshold();
        report.extend(means);
    }
    let report = report.sorted();

    let format = ReportFormat { timing: args.timing };
    let is_json = args.out.extension().is_some_and(|x| x.eq_ignore_ascii_case("json"));
    let text = if is_json { report.to_json(format) } else { report.to_csv(format) };
    fs::write(&args.out, text).map_err(|e| Failure::Io(format!("{}: {e}", args.out.display())))?;

    let ok = report
        .entries
        .iter()
        .filter(|e| !matches!(e.snr, SnrCell::Failed(_)))
        .count();
    println!(
        "{} rows ({ok} scored) from {} file(s) written to {}",
        report.entries.len(),
        files.len(),
        args.out.display()
    );
    if ok == 0 {
        return Err(Failure::Processing("no cell could be scored".into()));
    }
    Ok(())
}
