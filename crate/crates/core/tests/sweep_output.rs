use risnoma::harness::{load_config, parse_config, run_sweep, Axis, SweepSpec, CSV_HEADER};
use risnoma::simulator::{Backend, Metric, Scenario};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

#[test]
fn analytic_sweep_matches_golden_csv() {
    let cfg = load_config(format!("{FIXTURES}/analytic_sweep.toml")).unwrap();
    let spec = cfg.sweep.clone().unwrap();
    let out = run_sweep(&cfg, &spec).unwrap();
    let golden = std::fs::read_to_string(format!("{FIXTURES}/analytic_sweep.csv")).unwrap();
    assert_eq!(out.to_csv(), golden);
}

#[test]
fn csv_rows_follow_header() {
    let golden = std::fs::read_to_string(format!("{FIXTURES}/analytic_sweep.csv")).unwrap();
    let mut lines = golden.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let width = CSV_HEADER.len();
    for line in lines.filter(|l| !l.starts_with('#')) {
        assert_eq!(line.split(',').count(), width, "{line}");
    }
    // comments only after the table
    let first_comment = golden.lines().position(|l| l.starts_with('#')).unwrap();
    assert!(golden.lines().skip(first_comment).all(|l| l.starts_with('#')));
}

fn small_simulated_spec() -> SweepSpec {
    SweepSpec {
        axis: Axis::SnrDbm,
        grid: vec![0.0, 10.0],
        scenarios: Scenario::ALL.to_vec(),
        backends: vec![Backend::Analytic, Backend::Simulated],
        metrics: Metric::ALL.to_vec(),
        n_trials: 10_000,
        master_seed: 7,
        series: vec![risnoma::harness::SeriesSpec::plain("s")],
    }
}

fn in_pool(threads: usize, cfg: &risnoma::harness::Config, spec: &SweepSpec) -> String {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run_sweep(cfg, spec).unwrap().to_csv())
}

#[test]
fn output_is_identical_across_thread_counts() {
    let cfg = parse_config("").unwrap();
    let spec = small_simulated_spec();
    let one = in_pool(1, &cfg, &spec);
    let eight = in_pool(8, &cfg, &spec);
    assert_eq!(one, eight);
    assert!(one.contains(",simulated,"));
}

#[test]
fn seed_changes_simulated_rows_only() {
    let cfg = parse_config("").unwrap();
    let mut spec = small_simulated_spec();
    spec.grid = vec![5.0];
    let a = run_sweep(&cfg, &spec).unwrap();
    spec.master_seed = 8;
    let b = run_sweep(&cfg, &spec).unwrap();
    let mut moved = 0;
    for (x, y) in a.rows.iter().zip(&b.rows) {
        match x.backend {
            Backend::Analytic => assert_eq!(x.estimate, y.estimate),
            Backend::Simulated => moved += usize::from(x.estimate != y.estimate),
        }
    }
    assert!(moved >= 9, "only {moved} simulated rows changed");
}
