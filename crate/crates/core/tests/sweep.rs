use declip_core::eval::{average_gain, run_sweep, ReportFormat, SnrCell, SweepSpec, BASELINE_ENGINE};
use declip_core::synth::harmonic_speech;
use declip_core::Engine;

fn small_sweep(engines: Vec<Engine>) -> SweepSpec {
    SweepSpec {
        thresholds: vec![0.7, 0.9],
        engines,
        ..SweepSpec::default()
    }
}

fn db(cell: &SnrCell) -> f64 {
    match cell {
        SnrCell::Db(v) => *v,
        SnrCell::Exact => f64::INFINITY,
        SnrCell::Failed(e) => panic!("cell failed: {e}"),
    }
}

#[test]
fn engines_score_identically() {
    let clean = harmonic_speech(2000, 16000);
    let report = run_sweep("speech", &clean, &small_sweep(Engine::ALL.to_vec()));
    assert_eq!(report.entries.len(), 6);
    let gain = average_gain(&report.for_engine("reference"), &report.for_engine("spectral")).unwrap();
    assert!(gain.abs() <= 1e-6, "{gain}");
}

#[test]
fn every_row_improves_on_the_clipped_input() {
    let clean = harmonic_speech(4000, 16000);
    let report = run_sweep("speech", &clean, &small_sweep(vec![Engine::Spectral]));
    let baseline = report.for_engine(BASELINE_ENGINE);
    let declipped = report.for_engine("spectral");
    for (b, d) in baseline.entries.iter().zip(&declipped.entries) {
        assert_eq!(b.theta_c, d.theta_c);
        assert!(b.clipped > 0);
        assert!(db(&d.snr) > db(&b.snr), "theta {}: {:?} vs {:?}", b.theta_c, d.snr, b.snr);
    }
    assert!(average_gain(&declipped, &baseline).unwrap() > 0.0);
}

#[test]
fn regenerated_reports_are_byte_identical() {
    let clean = harmonic_speech(2000, 16000);
    let spec = small_sweep(vec![Engine::Spectral]);
    let a = run_sweep("speech", &clean, &spec);
    let b = run_sweep("speech", &clean, &spec);
    let format = ReportFormat::default();
    assert_eq!(a.to_csv(format), b.to_csv(format));
    assert_eq!(a.to_json(format), b.to_json(format));
}
