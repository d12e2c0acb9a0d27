use gaussfit::bench::{run_bench_snr, BenchConfig, SnrGrid};
use gaussfit::erf::{build_erf_table, KGrid};
use gaussfit::io::{
    read_erf_table_csv, read_report_csv, read_signal_csv, write_erf_table_csv, write_report_csv,
    write_signal_csv,
};
use gaussfit::signal::{sample_gaussian, GaussianParams, NoiseSpec};
use gaussfit::FitError;

#[test]
fn signal_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("signal.csv");
    let p = GaussianParams::new(1.0, 8.4, 1.2).unwrap();
    let s = sample_gaussian(&p, 0.01, 1001, Some(NoiseSpec { snr_db: 10.0, seed: 5 })).unwrap();
    write_signal_csv(&s, &path).unwrap();
    let back = read_signal_csv(&path).unwrap();
    assert_eq!(back.samples(), s.samples());
    assert_eq!(back.len(), 1001);
    assert!((back.delta_x() - 0.01).abs() < 1e-15);
}

#[test]
fn report_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let config = BenchConfig {
        trials: 20,
        snr_grid: SnrGrid { start: 0.0, step: 10.0, stop: 20.0 },
        ..Default::default()
    };
    let report = run_bench_snr(&config).unwrap();
    write_report_csv(&report, &path).unwrap();
    let rows = read_report_csv(&path).unwrap();
    assert_eq!(rows.len(), report.rows.len());
    for (a, b) in rows.iter().zip(&report.rows) {
        assert_eq!((a.method, a.param, a.trials, a.degenerate, a.seed), (b.method, b.param, b.trials, b.degenerate, b.seed));
        assert_eq!(a.sweep.to_bits(), b.sweep.to_bits());
        assert!(a.mse.to_bits() == b.mse.to_bits() || (a.mse.is_nan() && b.mse.is_nan()));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("method,sweep,param,mse,trials,degenerate,mean_time_us,seed\n"));
}

#[test]
fn erf_table_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("erf.csv");
    let t = build_erf_table(&KGrid::default()).unwrap();
    write_erf_table_csv(&t, &path).unwrap();
    assert_eq!(read_erf_table_csv(&path).unwrap(), t);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(read_signal_csv(dir.path().join("nope.csv")), Err(FitError::Io(_))));
}
