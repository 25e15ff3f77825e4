mod common;

use std::path::Path;

use rydqec::bench::{
    emit_report, fit_scaling_exponent, read_records_csv, round_time_summary, run_bench,
    BenchError, ExperimentConfig, FitPoint, Report, ReportFormat, ResultRecord,
};
use rydqec::dem_decode::{count_failures, decode_batch, decompose_graphlike, build_dem};
use rydqec::frame_sim::sample_circuit;
use rydqec::pulse::{self, GateKind};
use rydqec::surface::{
    build_memory_circuit, noiseless_channels, BoundaryMode, CodeLayout, GateOrdering,
    MemoryBasis, MemorySpec, Pairing,
};

fn config_text(dir: &Path, extra: &str) -> String {
    format!(
        r#"
version = 1
distances = [3]
gammas = [1e-3, 3e-3]
shots = 2000
seed = 7
fit_points = 2
min_failures = 1
cache_dir = "{cache}"
{extra}

[[series]]
ordering = "two_cz2_ft"

[[series]]
ordering = "two_cz2_ft"
boundary = "global_pulse"

[pulses]
cz2 = "{dir}/cz2.json"
cz = "{dir}/cz.json"
synthesize_missing = false
"#,
        cache = dir.join("cache").display(),
        dir = dir.display(),
    )
}

fn write_reference_pulses(dir: &Path) {
    pulse::io::save(&common::reference_pulse(GateKind::Cz2), dir.join("cz2.json")).unwrap();
    pulse::io::save(&common::reference_pulse(GateKind::Cz), dir.join("cz.json")).unwrap();
}

fn record(gamma: f64, failures: usize) -> ResultRecord {
    ResultRecord {
        ordering: "two_cz2_nonft".into(),
        boundary: BoundaryMode::LocalTimeOptimal,
        basis: "x".into(),
        distance: 5,
        rounds: 5,
        gamma,
        shots: 123_457,
        failures,
        p_l: failures as f64 / 123_457.0,
        sigma: (failures as f64).sqrt() / 123_457.0,
        low_confidence: failures < 10,
        hyperedges: 17,
        undecomposable: 2,
        seed: 0xdead_beef_cafe_f00d,
    }
}

#[test]
fn fit_recovers_an_exact_power_law() {
    for nu in [1.0, 2.0, 2.5] {
        let shots = 1_000_000_000usize;
        let pts: Vec<FitPoint> = (0..6)
            .map(|i| {
                let gamma = 1e-3 * 2f64.powi(i);
                let failures = (3.0 * gamma.powf(nu) * shots as f64).round() as usize;
                FitPoint { gamma, failures, shots }
            })
            .collect();
        let fit = fit_scaling_exponent(&pts, 5, 10).unwrap();
        assert!((fit.nu - nu).abs() < 1e-3 + 2.0 * fit.sigma_nu, "{nu}: {fit:?}");
        assert_eq!(fit.gammas.len(), 5);
        assert_eq!(fit.gammas[0], 1e-3);
    }
}

#[test]
fn fit_needs_enough_points() {
    let pts = [
        FitPoint { gamma: 1e-3, failures: 0, shots: 100 },
        FitPoint { gamma: 2e-3, failures: 12, shots: 100 },
        FitPoint { gamma: 4e-3, failures: 40, shots: 100 },
    ];
    assert!(matches!(
        fit_scaling_exponent(&pts, 3, 10),
        Err(BenchError::InsufficientPoints { have: 2, need: 3 })
    ));
}

#[test]
fn noiseless_memory_never_fails() {
    let l = CodeLayout::new(3).unwrap();
    for ordering in [GateOrdering::two_cz2(Pairing::Ft), GateOrdering::four_cz()] {
        let spec = MemorySpec {
            ordering,
            basis: MemoryBasis::X,
            rounds: 3,
            boundary: BoundaryMode::GlobalPulse,
        };
        let c = build_memory_circuit(&l, &spec, &noiseless_channels()).unwrap();
        let g = decompose_graphlike(&build_dem(&c).unwrap()).unwrap();
        let batch = sample_circuit(&c, 5000, 1).unwrap();
        assert_eq!(count_failures(&batch, &decode_batch(&g, &batch).unwrap()), 0);
    }
}

#[test]
fn round_time_counts_windows() {
    let s = round_time_summary(&common::reference_pulses());
    assert_eq!((s.windows_two_cz2, s.windows_four_cz), (2, 4));
    let t = 4.0 * std::f64::consts::PI;
    assert!((s.two_cz2 - 2.0 * t).abs() < 1e-12);
    assert!((s.four_cz.unwrap() - 4.0 * t).abs() < 1e-12);
    assert!((s.ratio.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = config_text(dir.path(), "");
    ExperimentConfig::from_toml(&good).unwrap();
    for (from, to) in [
        ("version = 1", "version = 2"),
        ("distances = [3]", "distances = [4]"),
        ("gammas = [1e-3, 3e-3]", "gammas = [3e-3, 1e-3]"),
        ("shots = 2000", "shots = 0"),
        ("ordering = \"two_cz2_ft\"", "ordering = \"three_cz\""),
        ("seed = 7", ""),
    ] {
        let text = good.replacen(from, to, 1);
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(matches!(err, BenchError::Config(_)), "{to}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
    let cfg = ExperimentConfig::from_toml(&good).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn missing_pulses_without_synthesis_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&config_text(dir.path(), "")).unwrap();
    let err = run_bench(&cfg).unwrap_err();
    assert!(matches!(err, BenchError::Config(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn empty_report_has_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let report = Report {
        config: ExperimentConfig::from_toml(&config_text(dir.path(), "")).unwrap(),
        round_time: round_time_summary(&common::reference_pulses()),
        records: vec![],
        fits: vec![],
        fit_failures: vec![],
    };
    let files = emit_report(&report, ReportFormat::Csv, &dir.path().join("out/run.csv")).unwrap();
    assert_eq!(files.len(), 3);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("ordering,boundary,basis,distance"));
    assert_eq!(std::fs::read_to_string(&files[1]).unwrap().lines().count(), 1);
    assert!(read_records_csv(&files[0]).unwrap().is_empty());
    let json = dir.path().join("run.json");
    emit_report(&report, ReportFormat::Json, &json).unwrap();
    let back = Report::from_json(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(back.records.is_empty());
}

#[test]
fn reports_round_trip_every_digit() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<ResultRecord> = [(1.0 / 3.0, 7), (std::f64::consts::E * 1e-4, 1), (0.1 + 0.2, 98_765)]
        .into_iter()
        .map(|(g, f)| record(g, f))
        .collect();
    let report = Report {
        config: ExperimentConfig::from_toml(&config_text(dir.path(), "")).unwrap(),
        round_time: round_time_summary(&common::reference_pulses()),
        records: records.clone(),
        fits: vec![],
        fit_failures: vec!["none".into()],
    };
    let csv_path = dir.path().join("r.csv");
    emit_report(&report, ReportFormat::Csv, &csv_path).unwrap();
    let back = read_records_csv(&csv_path).unwrap();
    assert_eq!(back, records);
    let json = report.to_json().unwrap();
    let back = Report::from_json(&json).unwrap();
    assert_eq!(back.records, records);
    assert_eq!(back.round_time, report.round_time);
    for (a, b) in back.records.iter().zip(&records) {
        assert_eq!(format!("{:.15e}", a.gamma), format!("{:.15e}", b.gamma));
    }
}

#[test]
fn bench_runs_end_to_end_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_reference_pulses(dir.path());
    let cfg = ExperimentConfig::from_toml(&config_text(dir.path(), "")).unwrap();
    let a = run_bench(&cfg).unwrap();
    // Two series, two rates, two bases plus the pooled row.
    assert_eq!(a.records.len(), 2 * 2 * 3);
    assert!(a.records.iter().all(|r| r.shots == 2000 || r.basis == "both"));
    let pooled = &a.records[2];
    assert_eq!(pooled.basis, "both");
    assert_eq!(pooled.failures, a.records[0].failures + a.records[1].failures);
    assert!(a.records.iter().any(|r| r.failures > 0));
    let b = run_bench(&cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    // The cache now holds every table.
    assert!(std::fs::read_dir(dir.path().join("cache")).unwrap().count() >= 3 * 2);
}
